//! Gram matrices of H^{-1}(K) and H-tilde^{-1}(K) on P_p(K) by 2D dual solves.

use crate::error::{invalid, Result};
use crate::linalg::{spd_inverse, spd_solve};
use crate::polyspace::scalar_dim;
use crate::polyspace::spaces::{bubble_basis, stiffness};
use crate::refelem::Element;
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DualOneVariant {
    /// Dual of H^1_0(K): `-Laplace phi = q`, `phi = 0` on the boundary.
    HMinus1,
    /// Dual of H^1(K): `-Laplace phi + phi = q`, natural boundary condition.
    HTildeMinus1,
}

/// `G_ij = <q_i, phi_j>` with phi_j solved in P_{p_ref}(K).
pub fn dualone_gram(
    element: Element,
    p: usize,
    variant: DualOneVariant,
    p_ref: usize,
) -> Result<DMatrix<f64>> {
    if p_ref < p + 2 {
        return Err(invalid("reference degree must exceed p by at least 2"));
    }
    let n = scalar_dim(element, p);
    let s = stiffness(element, p_ref);
    let g = match variant {
        DualOneVariant::HMinus1 => {
            let b = bubble_basis(element, p_ref);
            let sb = b.transpose() * &s * &b;
            let bp = b.rows(0, n).into_owned();
            let x = spd_solve(&sb, &bp.transpose())?;
            bp * x
        }
        DualOneVariant::HTildeMinus1 => {
            let m = s.nrows();
            let a = s + DMatrix::identity(m, m);
            spd_inverse(&a)?.view((0, 0), (n, n)).into_owned()
        }
    };
    Ok(0.5 * (&g + g.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, sym_eigen};
    use crate::math::PI;

    #[test]
    fn torsion_of_square() {
        // int phi with -Laplace phi = 1 on Q, phi = 0 on the boundary:
        // sum over odd m, n of 64 / (pi^6 m^2 n^2 (m^2 + n^2))
        let mut exact = 0.0;
        for m in (1..4000).step_by(2) {
            for k in (1..4000).step_by(2) {
                let (mf, kf) = (m as f64, k as f64);
                exact += 64.0 / (libm::pow(PI, 6.0) * mf * mf * kf * kf * (mf * mf + kf * kf));
            }
        }
        assert!((exact - 0.035144253).abs() < 1e-8, "{exact}");
        let g = dualone_gram(Element::Square, 0, DualOneVariant::HMinus1, 24).unwrap();
        assert!(
            (g[(0, 0)] - exact).abs() < 1e-9 * exact,
            "{} {exact}",
            g[(0, 0)]
        );
    }

    #[test]
    fn symmetric_positive() {
        for el in Element::ALL {
            for v in [DualOneVariant::HMinus1, DualOneVariant::HTildeMinus1] {
                let g = dualone_gram(el, 4, v, 10).unwrap();
                assert!(asymmetry(&g) < 1e-12);
                assert!(sym_eigen(&g).0[0] > 0.0);
            }
        }
    }
}
