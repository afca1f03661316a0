//! Spectral data for the lifts into the cylinder D = K x (0,1).
//!
//! The lift is Galerkin in P_n(K) and exact in x3: with the L2-orthonormal
//! eigenpairs (lambda_m, psi_m) of the discrete Laplacian on K, a Neumann
//! datum q on the bottom face produces the profile
//! `sinh(mu (1 - x3)) / (mu cosh mu)` in mode m, mu = sqrt(lambda_m).
//! The trace on K is then `sum_m g(lambda_m) <q, psi_m> psi_m` with
//! `g(lambda) = tanh(mu) / mu`.

use crate::linalg::{gen_sym_eigen, sym_eigen};
use crate::math::{sqrt, tanh};
use crate::polyspace::spaces::{bubble_basis, bubbles01, legendre01_diff, stiffness};
use crate::polyspace::{mode_index, scalar_dim};
use crate::refelem::Element;
use nalgebra::{DMatrix, DVector};

/// Lateral boundary condition of the cylinder problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiftVariant {
    /// Homogeneous Neumann on the lateral faces (the H-tilde^{-1/2} norm).
    Tilde,
    /// Homogeneous Dirichlet on the lateral faces (the H^{-1/2} norm).
    Plain,
}

/// Trace factor `tanh(sqrt(l)) / sqrt(l)`, equal to 1 at l = 0.
pub fn trace_factor(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mu = sqrt(lambda);
    if mu < 1e-4 {
        1.0 - lambda / 3.0 + 2.0 * lambda * lambda / 15.0
    } else {
        tanh(mu) / mu
    }
}

/// Eigenmodes of the lateral operator in P_n(K).
#[derive(Clone, Debug)]
pub struct LiftSpectrum {
    pub element: Element,
    pub degree: usize,
    pub variant: LiftVariant,
    /// Columns are L2-orthonormal modes in modal coefficients of P_n(K).
    pub modes: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    /// `trace_factor(eigenvalues)`.
    pub factors: DVector<f64>,
}

/// 1D modes on [0,1]: Neumann (full P_n) or Dirichlet (bubbles).
fn modes_1d(n: usize, variant: LiftVariant) -> (DVector<f64>, DMatrix<f64>) {
    let d = legendre01_diff(n);
    let s = d.transpose() * &d;
    match variant {
        LiftVariant::Tilde => {
            // the constant mode decouples exactly: row and column 0 of s vanish
            let (v, u) = sym_eigen(&s.view((1, 1), (n, n)).into_owned());
            let mut vals = DVector::zeros(n + 1);
            let mut vecs = DMatrix::zeros(n + 1, n + 1);
            vecs[(0, 0)] = 1.0;
            for k in 0..n {
                vals[k + 1] = v[k];
                vecs.view_mut((1, k + 1), (n, 1)).copy_from(&u.column(k));
            }
            (vals, vecs)
        }
        LiftVariant::Plain => {
            let b = bubbles01(n);
            let sb = b.transpose() * &s * &b;
            let (v, u) = sym_eigen(&sb);
            (v, b * u)
        }
    }
}

impl LiftSpectrum {
    pub fn new(element: Element, degree: usize, variant: LiftVariant) -> Self {
        let (eigenvalues, modes) = match element {
            Element::Square => Self::tensor_modes(degree, variant),
            Element::Triangle => Self::generic_modes(element, degree, variant),
        };
        let factors = eigenvalues.map(trace_factor);
        Self {
            element,
            degree,
            variant,
            modes,
            eigenvalues,
            factors,
        }
    }

    /// Eigenmodes from a dense eigensolve on P_n(K); valid on either element.
    pub fn generic_modes(
        element: Element,
        n: usize,
        variant: LiftVariant,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let s = stiffness(element, n);
        let dim = scalar_dim(element, n);
        match variant {
            LiftVariant::Tilde => {
                let (v, u) = sym_eigen(&s.view((1, 1), (dim - 1, dim - 1)).into_owned());
                let mut vals = DVector::zeros(dim);
                let mut vecs = DMatrix::zeros(dim, dim);
                vecs[(0, 0)] = 1.0;
                for k in 0..dim - 1 {
                    vals[k + 1] = v[k];
                    vecs.view_mut((1, k + 1), (dim - 1, 1))
                        .copy_from(&u.column(k));
                }
                (vals, vecs)
            }
            LiftVariant::Plain => {
                let b = bubble_basis(element, n);
                let sb = b.transpose() * &s * &b;
                let m = DMatrix::identity(b.ncols(), b.ncols());
                let (v, u) = gen_sym_eigen(&sb, &m).expect("identity mass");
                (v, b * u)
            }
        }
    }

    fn tensor_modes(n: usize, variant: LiftVariant) -> (DVector<f64>, DMatrix<f64>) {
        let el = Element::Square;
        let (mu, u) = modes_1d(n, variant);
        let m1 = mu.len();
        let dim = scalar_dim(el, n);
        let mut vals = DVector::zeros(m1 * m1);
        let mut vecs = DMatrix::zeros(dim, m1 * m1);
        for a in 0..m1 {
            for b in 0..m1 {
                let col = a * m1 + b;
                vals[col] = mu[a] + mu[b];
                for i in 0..=n {
                    let ua = u[(i, a)];
                    if ua == 0.0 {
                        continue;
                    }
                    for j in 0..=n {
                        vecs[(mode_index(el, i, j), col)] = ua * u[(j, b)];
                    }
                }
            }
        }
        (vals, vecs)
    }

    /// Number of modal coefficients of P_n(K).
    pub fn ambient_dim(&self) -> usize {
        self.modes.nrows()
    }
}
