//! One entry point for every Gram matrix, keyed by a space tag.

use super::dualhalf::{DualHalfGram, LIFT_MARGIN};
use super::dualone::{dualone_gram, DualOneVariant};
use super::edge::EdgeH12Gram;
use super::spectrum::LiftVariant;
use crate::error::{invalid, Result};
use crate::polyspace::scalar_dim;
use crate::polyspace::spaces::stiffness;
use crate::refelem::Element;
use core::fmt;
use core::str::FromStr;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GramKind {
    /// H-tilde^{1/2} on the edge bubbles of one edge.
    EdgeH12 {
        edge: usize,
    },
    DualHalfTilde,
    DualHalfPlain,
    L2,
    H1Semi,
    HMinus1,
    HTildeMinus1,
}

impl GramKind {
    pub const ALL_TAGS: [&'static str; 7] = [
        "edge-h12",
        "dualhalf-tilde",
        "dualhalf-plain",
        "l2",
        "h1-semi",
        "h-minus1",
        "h-tilde-minus1",
    ];

    /// Whether the Gram is positive definite on its space (h1-semi kills constants).
    pub fn is_definite(self) -> bool {
        self != GramKind::H1Semi
    }
}

impl fmt::Display for GramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GramKind::EdgeH12 { edge } => write!(f, "edge-h12:{edge}"),
            GramKind::DualHalfTilde => f.write_str("dualhalf-tilde"),
            GramKind::DualHalfPlain => f.write_str("dualhalf-plain"),
            GramKind::L2 => f.write_str("l2"),
            GramKind::H1Semi => f.write_str("h1-semi"),
            GramKind::HMinus1 => f.write_str("h-minus1"),
            GramKind::HTildeMinus1 => f.write_str("h-tilde-minus1"),
        }
    }
}

impl FromStr for GramKind {
    type Err = crate::Error;

    /// Accepts the tags above; `edge-h12` takes an optional `:edge` suffix.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("edge-h12") {
            let edge = match rest.strip_prefix(':') {
                Some(e) => e
                    .parse()
                    .map_err(|_| invalid("edge index is not a number"))?,
                None if rest.is_empty() => 0,
                None => return Err(invalid("unknown Gram kind")),
            };
            return Ok(GramKind::EdgeH12 { edge });
        }
        Ok(match s {
            "dualhalf-tilde" => GramKind::DualHalfTilde,
            "dualhalf-plain" => GramKind::DualHalfPlain,
            "l2" => GramKind::L2,
            "h1-semi" => GramKind::H1Semi,
            "h-minus1" => GramKind::HMinus1,
            "h-tilde-minus1" => GramKind::HTildeMinus1,
            _ => return Err(invalid("unknown Gram kind")),
        })
    }
}

/// Gram matrix of `kind` on P_p(K) (edge kinds: on the edge bubbles of
/// degree <= p), with lifts and dual solves of degree `p + margin`.
pub fn gram_matrix(
    element: Element,
    kind: GramKind,
    p: usize,
    margin: usize,
) -> Result<DMatrix<f64>> {
    let margin = margin.max(2);
    let n = scalar_dim(element, p);
    match kind {
        GramKind::EdgeH12 { edge } => Ok(EdgeH12Gram::new(element, edge, p, p + margin)?.matrix),
        GramKind::DualHalfTilde => {
            Ok(DualHalfGram::new(element, p, LiftVariant::Tilde, p.max(1) + margin)?.matrix)
        }
        GramKind::DualHalfPlain => {
            Ok(DualHalfGram::new(element, p, LiftVariant::Plain, p.max(1) + margin)?.matrix)
        }
        GramKind::L2 => Ok(DMatrix::identity(n, n)),
        GramKind::H1Semi => Ok(stiffness(element, p)),
        GramKind::HMinus1 => dualone_gram(element, p, DualOneVariant::HMinus1, p + margin),
        GramKind::HTildeMinus1 => {
            dualone_gram(element, p, DualOneVariant::HTildeMinus1, p + margin)
        }
    }
}

/// [`gram_matrix`] with the default margin.
pub fn gram_default(element: Element, kind: GramKind, p: usize) -> Result<DMatrix<f64>> {
    gram_matrix(element, kind, p, LIFT_MARGIN)
}

/// Discrete H-tilde^{-1/2}(K) norm of a residual given by its L2-projection
/// coefficients onto P_{p_ref}(K) (shorter vectors are zero padded).
pub fn dualhalf_norm(gram: &DualHalfGram, coeffs: &DVector<f64>) -> f64 {
    libm::sqrt(gram.norm_sq_of(coeffs).max(0.0))
}

/// Graph norms of a vector residual from its parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub div_l2: f64,
    pub dualhalf: f64,
    pub dualhalf_div: f64,
}

impl ErrorNorms {
    /// `(||e||^2 + ||div e||^2)^(1/2)`.
    pub fn hdiv(&self) -> f64 {
        libm::sqrt(self.l2 * self.l2 + self.div_l2 * self.div_l2)
    }

    /// The H-tilde^{-1/2}(div) graph norm: both components and the divergence
    /// in H-tilde^{-1/2}.
    pub fn dualhalf_graph(&self) -> f64 {
        libm::sqrt(self.dualhalf * self.dualhalf + self.dualhalf_div * self.dualhalf_div)
    }
}
