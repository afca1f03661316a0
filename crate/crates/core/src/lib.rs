//! Projection-based p-interpolation into Raviart-Thomas spaces on the
//! reference triangle and square, with the fractional Sobolev inner
//! products, Poincare operators and verification sweeps it relies on.
#![no_std]

extern crate alloc;

pub mod error;
pub mod math;
pub mod refelem;

pub use error::{Error, Result};
pub use refelem::{Edge, Element};
pub mod fields;
pub mod interp;
pub mod linalg;
pub mod poincare;
pub mod polyspace;
pub mod sobolev;
pub mod verify;
