//! Discrete fractional and negative-order inner products.

mod dualhalf;
mod dualone;
mod edge;
mod gram;
mod spectrum;

pub use dualhalf::{DualHalfGram, LIFT_MARGIN};
pub use dualone::{dualone_gram, DualOneVariant};
pub use edge::{blended_extensions, EdgeH12Gram, HarmonicExtension};
pub use gram::{dualhalf_norm, gram_default, gram_matrix, ErrorNorms, GramKind};
pub use spectrum::{trace_factor, LiftSpectrum, LiftVariant};
