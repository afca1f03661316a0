use super::boundary::{tail_matrix, unit_flux_basis, vertex_shapes, ExtensionOperator};
use crate::error::{invalid, Result};
use crate::linalg::{complement_in, orthonormalize};
use crate::polyspace::{scalar_dim, PolySpace};
use crate::refelem::Element;
use crate::sobolev::{DualHalfGram, EdgeH12Gram, HarmonicExtension, LiftVariant, LIFT_MARGIN};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Per-edge data of the H-tilde^{1/2}(l) projection.
#[derive(Clone, Debug)]
pub struct EdgeStage {
    pub gram: EdgeH12Gram,
    /// Maps moments of psi' (degree <= n-1) to the right-hand side.
    pub from_derivative: DMatrix<f64>,
    /// Right-hand side contribution per unit value of psi at the start vertex.
    pub from_anchor: DVector<f64>,
}

/// Everything the interpolants of degree p on one element need, built once.
#[derive(Clone, Debug)]
pub struct InterpContext {
    pub element: Element,
    pub p: usize,
    pub lift_margin: usize,
    pub space: PolySpace,
    /// Unit-flux RT_1 basis in (P_1)^2.
    pub unit_flux: DMatrix<f64>,
    pub extension: Option<ExtensionOperator>,
    pub edges: Vec<EdgeStage>,
    /// H-tilde^{-1/2} Gram on P_{p-1}.
    pub half: DualHalfGram,
    /// Curls of the scalar bubbles, in (P_p)^2.
    pub curl_bubbles: DMatrix<f64>,
    /// Orthonormal RT bubbles L2-orthogonal to `curl_bubbles`.
    pub complement: DMatrix<f64>,
    /// Divergence of `complement` in P_{p-1}.
    pub complement_div: DMatrix<f64>,
    /// Vertex hat functions in P_p.
    pub vertex_shapes: DMatrix<f64>,
}

impl InterpContext {
    pub fn new(element: Element, p: usize) -> Result<Self> {
        Self::with_margin(element, p, LIFT_MARGIN)
    }

    pub fn with_margin(element: Element, p: usize, lift_margin: usize) -> Result<Self> {
        if p < 1 {
            return Err(invalid("interpolation degree must be at least 1"));
        }
        if lift_margin < 2 {
            return Err(invalid("lift margin must be at least 2"));
        }
        let space = PolySpace::new(element, p);
        let mut edges = Vec::new();
        let extension = if p >= 2 {
            let n = p + lift_margin;
            let lift = HarmonicExtension::new(element, n)?;
            let tail = tail_matrix(n, 1.0);
            for e in element.edges() {
                let gram = EdgeH12Gram::from_extension(&lift, e.index, p)?;
                debug_assert!((e.length - 1.0).abs() < 1e-14);
                let ft = gram.flux.transpose();
                let mut r0 = DVector::zeros(n - 1);
                r0[0] = libm::sqrt(e.length);
                edges.push(EdgeStage {
                    from_derivative: &ft * tail.transpose(),
                    from_anchor: &ft * r0,
                    gram,
                });
            }
            Some(ExtensionOperator::new(element, p)?)
        } else {
            None
        };
        let half = DualHalfGram::new(element, p - 1, LiftVariant::Tilde, p - 1 + lift_margin)?;
        let curl_bubbles = &space.curl * &space.bubbles;
        let complement = if space.rt_bubbles.ncols() > 0 {
            complement_in(&space.rt_bubbles, &orthonormalize(&curl_bubbles))
        } else {
            DMatrix::zeros(2 * space.dim(), 0)
        };
        let complement_div = &space.div * &complement;
        Ok(Self {
            element,
            p,
            lift_margin,
            unit_flux: unit_flux_basis(element),
            extension,
            edges,
            half,
            curl_bubbles,
            complement,
            complement_div,
            vertex_shapes: vertex_shapes(element, p),
            space,
        })
    }

    /// Degree of the moment data the interpolants of this context consume.
    pub fn required_degree(&self) -> usize {
        self.p + self.lift_margin
    }

    pub fn dim(&self) -> usize {
        scalar_dim(self.element, self.p)
    }
}
