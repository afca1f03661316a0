use super::spectrum::{LiftSpectrum, LiftVariant};
use crate::error::{invalid, Result};
use crate::polyspace::scalar_dim;
use crate::refelem::Element;
use alloc::sync::Arc;
use nalgebra::{DMatrix, DVector};

/// Default excess of the lift degree over the data degree.
pub const LIFT_MARGIN: usize = 6;

/// Gram matrix of the H-tilde^{-1/2}(K) (or H^{-1/2}(K)) inner product on
/// P_p(K), with the representer lifts `W_q` on the bottom face.
#[derive(Clone, Debug)]
pub struct DualHalfGram {
    pub element: Element,
    pub degree: usize,
    pub spectrum: Arc<LiftSpectrum>,
    pub matrix: DMatrix<f64>,
}

impl DualHalfGram {
    pub fn new(
        element: Element,
        p: usize,
        variant: LiftVariant,
        lift_degree: usize,
    ) -> Result<Self> {
        if lift_degree < p.max(1) + 2 {
            return Err(invalid(
                "lift degree must exceed the data degree by at least 2",
            ));
        }
        let spectrum = Arc::new(LiftSpectrum::new(element, lift_degree, variant));
        Self::from_spectrum(spectrum, p)
    }

    /// Reuses a spectrum; any `p` with `p + 2 <= spectrum.degree` is allowed.
    pub fn from_spectrum(spectrum: Arc<LiftSpectrum>, p: usize) -> Result<Self> {
        if spectrum.degree < p.max(1) + 2 {
            return Err(invalid(
                "lift degree must exceed the data degree by at least 2",
            ));
        }
        let n = scalar_dim(spectrum.element, p);
        let mut a = spectrum.modes.rows(0, n).into_owned();
        for (m, g) in spectrum.factors.iter().enumerate() {
            a.column_mut(m).scale_mut(libm::sqrt(*g));
        }
        let matrix = &a * a.transpose();
        Ok(Self {
            element: spectrum.element,
            degree: p,
            spectrum,
            matrix,
        })
    }

    pub fn variant(&self) -> LiftVariant {
        self.spectrum.variant
    }

    pub fn lift_degree(&self) -> usize {
        self.spectrum.degree
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Pairings `<f, q_j>` for every basis mode q_j of P_p(K), given the
    /// L2-projection coefficients of f onto P_n(K), n the lift degree.
    pub fn pair_projected(&self, f_coeffs: &DVector<f64>) -> DVector<f64> {
        let s = &self.spectrum;
        assert_eq!(f_coeffs.len(), s.ambient_dim());
        let mut amp = s.modes.transpose() * f_coeffs;
        amp.component_mul_assign(&s.factors);
        s.modes.rows(0, self.dim()) * amp
    }

    /// Modal coefficients in P_n(K) of the representer `W_{q_j}`.
    pub fn representer(&self, j: usize) -> DVector<f64> {
        let s = &self.spectrum;
        let row = s.modes.row(j).transpose().component_mul(&s.factors);
        &s.modes * row
    }

    /// Squared norm of a polynomial of degree <= lift degree - 2, given its
    /// modal coefficients (any length up to dim P_n).
    pub fn norm_sq_of(&self, c: &DVector<f64>) -> f64 {
        let s = &self.spectrum;
        let rows = c.len();
        let amp = s.modes.rows(0, rows).transpose() * c;
        amp.iter()
            .zip(s.factors.iter())
            .map(|(a, g)| a * a * g)
            .sum()
    }
}
