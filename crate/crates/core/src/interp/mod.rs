//! Projection-based interpolants: the lowest-order, edge and interior stages
//! of the H(div) interpolants, the H1 interpolant, and the scalar projectors.

mod boundary;
mod context;
mod data;
mod operators;

pub use boundary::{
    edge_fluxes, lowest_order, tail_matrix, unit_flux_basis, vertex_shapes, BoundaryPotential,
    ExtensionOperator, CLOSURE_TOL,
};
pub use context::{EdgeStage, InterpContext};
pub use data::{edge_legendre, ScalarData, VectorData};
pub use operators::{
    proj_dualhalf, proj_dualhalf_with, proj_l2, Diagnostics, DivPairing, InterpolantParts,
    INTERIOR_TOL,
};
