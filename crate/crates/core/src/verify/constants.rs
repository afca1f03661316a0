use super::ConstantSweep;
use crate::error::Result;
use crate::linalg::{column_space, complement_in, orthonormalize, sym_eigen};
use crate::polyspace::spaces::{
    bubble_basis, curl_matrix, diff_matrices, div_matrix, rt_basis, rt_bubble_basis, stiffness,
};
use crate::refelem::Element;
use crate::sobolev::{dualone_gram, DualOneVariant, LIFT_MARGIN};
use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;

pub const FRIEDRICHS_MAX_SPREAD: f64 = 2.0;
pub const FRIEDRICHS_MAX_GROWTH: f64 = 0.15;
pub const INVERSE_MAX_GROWTH: f64 = 2.3;
/// Degrees above p - 1 at which the dual norms are solved; smaller margins
/// underestimate the H^{-1} norm on Q noticeably by p = 8.
pub const FRIEDRICHS_MARGIN: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FriedrichsVariant {
    /// RT bubbles orthogonal to curl P^0_p, divergence in H-tilde^{-1}.
    Bubble,
    /// RT_p orthogonal to curl P_p, divergence in H^{-1}.
    Full,
}

impl FriedrichsVariant {
    pub fn tag(self) -> &'static str {
        match self {
            FriedrichsVariant::Bubble => "bubble",
            FriedrichsVariant::Full => "full",
        }
    }
}

/// L2-orthonormal basis (in (P_p)^2 coefficients) of the curl-orthogonal
/// subspace.
pub fn friedrichs_subspace(element: Element, p: usize, variant: FriedrichsVariant) -> DMatrix<f64> {
    let d = diff_matrices(element, p);
    let curl = curl_matrix(element, p, &d);
    match variant {
        FriedrichsVariant::Bubble => {
            let b = rt_bubble_basis(element, p);
            if b.ncols() == 0 {
                return b;
            }
            let c = &curl * bubble_basis(element, p);
            let c = if c.ncols() == 0 {
                c
            } else {
                orthonormalize(&c)
            };
            complement_in(&b, &c)
        }
        FriedrichsVariant::Full => {
            // curl kills the constants only
            let c = column_space(&curl, 1e-10);
            complement_in(&rt_basis(element, p), &c)
        }
    }
}

/// `sup ||u||_{L2} / ||div u||_{dual}` over the subspace (0 when it is empty),
/// with the dual norm solved at degree `p - 1 + margin`.
pub fn friedrichs_constant(element: Element, p: usize, variant: FriedrichsVariant) -> Result<f64> {
    friedrichs_constant_with(element, p, variant, FRIEDRICHS_MARGIN)
}

pub fn friedrichs_constant_with(
    element: Element,
    p: usize,
    variant: FriedrichsVariant,
    margin: usize,
) -> Result<f64> {
    let s = friedrichs_subspace(element, p, variant);
    if s.ncols() == 0 {
        return Ok(0.0);
    }
    let dual = match variant {
        FriedrichsVariant::Bubble => DualOneVariant::HTildeMinus1,
        FriedrichsVariant::Full => DualOneVariant::HMinus1,
    };
    let g = dualone_gram(element, p - 1, dual, p - 1 + margin.max(2))?;
    let ds = div_matrix(element, p, &diff_matrices(element, p)) * &s;
    let a = ds.transpose() * g * ds;
    let (vals, _) = sym_eigen(&(0.5 * (&a + a.transpose())));
    Ok(1.0 / libm::sqrt(vals[0]))
}

pub fn friedrichs_sweep(
    element: Element,
    degrees: &[usize],
    variant: FriedrichsVariant,
) -> Result<ConstantSweep> {
    let values = degrees
        .iter()
        .map(|p| friedrichs_constant(element, *p, variant))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstantSweep::new(
        format!("friedrichs.{}.{}", element.name(), variant.tag()),
        degrees.to_vec(),
        values,
        FRIEDRICHS_MAX_SPREAD,
        FRIEDRICHS_MAX_GROWTH,
    ))
}

/// The pairs (r, s) of the inverse inequality `||q||_r <= C p^{2(r-s)} ||q||_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InversePair {
    /// (0, -1): L2 against H^{-1}.
    L2OverHMinus1,
    /// (1, 0): H1 (seminorm plus L2) against L2.
    H1OverL2,
}

impl InversePair {
    pub fn tag(self) -> &'static str {
        match self {
            InversePair::L2OverHMinus1 => "0,-1",
            InversePair::H1OverL2 => "1,0",
        }
    }
}

/// `max ||q||_r / ||q||_s` over P_p(K).
pub fn inverse_ratio(element: Element, p: usize, pair: InversePair) -> Result<f64> {
    Ok(match pair {
        InversePair::H1OverL2 => {
            let (vals, _) = sym_eigen(&stiffness(element, p));
            libm::sqrt(1.0 + vals[vals.len() - 1])
        }
        InversePair::L2OverHMinus1 => {
            let g = dualone_gram(element, p, DualOneVariant::HMinus1, p + LIFT_MARGIN)?;
            let (vals, _) = sym_eigen(&g);
            1.0 / libm::sqrt(vals[0])
        }
    })
}

pub fn inverse_sweep(
    element: Element,
    degrees: &[usize],
    pair: InversePair,
) -> Result<ConstantSweep> {
    let values = degrees
        .iter()
        .map(|p| inverse_ratio(element, *p, pair))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstantSweep::new(
        format!("inverse.{}.{}", element.name(), pair.tag()),
        degrees.to_vec(),
        values,
        f64::INFINITY,
        INVERSE_MAX_GROWTH,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gen_sym_eigen;
    use crate::polyspace::{scalar_dim, tabulate, tabulate_grad};
    use alloc::vec;

    /// Dense oracle: RT_p from monomial fields, constraints imposed by
    /// quadrature, the Rayleigh quotient by a generalized eigensolve.
    fn oracle(el: Element, p: usize, variant: FriedrichsVariant) -> f64 {
        let rule = el.rule(2 * p + 4).unwrap();
        let n = scalar_dim(el, p);
        // monomial spanning set of RT_p on T; Q_{p,p-1} x Q_{p-1,p} on Q
        // (component, or 2 for x times the monomial; i; j)
        let mut fields: Vec<(usize, usize, usize)> = Vec::new();
        match el {
            Element::Triangle => {
                for i in 0..p {
                    for j in 0..p - i {
                        fields.push((0, i, j));
                        fields.push((1, i, j));
                    }
                }
                for i in 0..p {
                    fields.push((2, i, p - 1 - i));
                }
            }
            Element::Square => {
                for i in 0..=p {
                    for j in 0..p {
                        fields.push((0, i, j));
                        fields.push((1, j, i));
                    }
                }
            }
        }
        let mono =
            |x: [f64; 2], i: usize, j: usize| libm::pow(x[0], i as f64) * libm::pow(x[1], j as f64);
        let eval = |f: &(usize, usize, usize), x: [f64; 2]| -> [f64; 2] {
            let m = mono(x, f.1, f.2);
            match f.0 {
                0 => [m, 0.0],
                1 => [0.0, m],
                _ => [x[0] * m, x[1] * m],
            }
        };
        // L2 projection onto (P_p)^2: exact, the fields lie in it
        let v = tabulate(el, p, &rule.nodes);
        let mut coeffs = DMatrix::<f64>::zeros(2 * n, fields.len());
        for (k, f) in fields.iter().enumerate() {
            for (r, x) in rule.nodes.iter().enumerate() {
                let u = eval(f, *x);
                for m in 0..n {
                    coeffs[(m, k)] += rule.weights[r] * v[(r, m)] * u[0];
                    coeffs[(n + m, k)] += rule.weights[r] * v[(r, m)] * u[1];
                }
            }
        }
        // constraints: normal moments (bubble), orthogonality to curl of the scalar space
        let mut rows: Vec<nalgebra::RowDVector<f64>> = Vec::new();
        if variant == FriedrichsVariant::Bubble {
            let (t, w) = crate::refelem::gauss_legendre(p + 2);
            for e in el.edges() {
                for k in 0..p {
                    let mut row = nalgebra::RowDVector::<f64>::zeros(fields.len());
                    for (c, f) in fields.iter().enumerate() {
                        row[c] = t
                            .iter()
                            .zip(&w)
                            .map(|(s, ws)| {
                                let u = eval(f, e.point(s * e.length));
                                ws * libm::pow(*s, k as f64)
                                    * (u[0] * e.normal[0] + u[1] * e.normal[1])
                            })
                            .sum();
                    }
                    rows.push(row);
                }
            }
        }
        // curl of the scalar space
        let [_, gx, gy] = tabulate_grad(el, p, &rule.nodes);
        let scal = match variant {
            FriedrichsVariant::Bubble => bubble_basis(el, p),
            FriedrichsVariant::Full => DMatrix::identity(n, n),
        };
        for c in 0..scal.ncols() {
            let dx = &gx * scal.column(c);
            let dy = &gy * scal.column(c);
            let mut row = nalgebra::RowDVector::<f64>::zeros(fields.len());
            for (k, f) in fields.iter().enumerate() {
                row[k] = rule
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(r, x)| {
                        let u = eval(f, *x);
                        rule.weights[r] * (u[0] * dy[r] - u[1] * dx[r])
                    })
                    .sum();
            }
            rows.push(row);
        }
        let mut cons = DMatrix::zeros(rows.len(), fields.len());
        for (i, r) in rows.iter().enumerate() {
            cons.row_mut(i).copy_from(r);
        }
        // the monomial fields are independent, so constraints act on their weights
        let (vals, vecs) = sym_eigen(&(cons.transpose() * &cons));
        let top = vals[vals.len() - 1];
        let free: Vec<usize> = (0..fields.len())
            .filter(|&k| vals[k] <= 1e-12 * top)
            .collect();
        let z = vecs.select_columns(&free);
        let basis: DMatrix<f64> = &coeffs * z;
        let dual = match variant {
            FriedrichsVariant::Bubble => DualOneVariant::HTildeMinus1,
            FriedrichsVariant::Full => DualOneVariant::HMinus1,
        };
        let g = dualone_gram(el, p - 1, dual, p - 1 + FRIEDRICHS_MARGIN).unwrap();
        let dv: DMatrix<f64> = div_matrix(el, p, &diff_matrices(el, p)) * &basis;
        let a: DMatrix<f64> = dv.transpose() * g * &dv;
        let m = basis.transpose() * &basis;
        let (vals, _) = gen_sym_eigen(&(0.5 * (&a + a.transpose())), &m).unwrap();
        1.0 / libm::sqrt(vals[0])
    }

    #[test]
    fn subspace_dimensions() {
        for p in 1..=8 {
            let t = friedrichs_subspace(Element::Triangle, p, FriedrichsVariant::Bubble).ncols();
            assert_eq!(t, p * (p - 1) - (p - 1) * p.saturating_sub(2) / 2, "T {p}");
            let q = friedrichs_subspace(Element::Square, p, FriedrichsVariant::Bubble).ncols();
            assert_eq!(q, 2 * p * (p - 1) - (p - 1) * (p - 1), "Q {p}");
        }
        // the full variant is the divergence complement: dim P_{p-1}
        for el in Element::ALL {
            for p in 1..=5 {
                let s = friedrichs_subspace(el, p, FriedrichsVariant::Full);
                assert_eq!(s.ncols(), scalar_dim(el, p - 1), "{el:?} {p}");
            }
        }
    }

    #[test]
    fn subspace_meets_kernel_of_div_trivially() {
        for el in Element::ALL {
            for variant in [FriedrichsVariant::Bubble, FriedrichsVariant::Full] {
                let s = friedrichs_subspace(el, 4, variant);
                let ds = div_matrix(el, 4, &diff_matrices(el, 4)) * &s;
                let (vals, _) = sym_eigen(&(ds.transpose() * ds));
                assert!(vals[0] > 1e-6, "{el:?} {variant:?}");
            }
        }
    }

    #[test]
    fn empty_bubble_space_gives_zero() {
        for el in Element::ALL {
            assert_eq!(
                friedrichs_constant(el, 1, FriedrichsVariant::Bubble).unwrap(),
                0.0
            );
            assert!(friedrichs_constant(el, 1, FriedrichsVariant::Full).unwrap() > 0.0);
        }
    }

    #[test]
    fn low_degrees_match_dense_oracle() {
        for el in Element::ALL {
            for variant in [FriedrichsVariant::Bubble, FriedrichsVariant::Full] {
                for p in [2, 3] {
                    let c = friedrichs_constant(el, p, variant).unwrap();
                    let o = oracle(el, p, variant);
                    assert!((c - o).abs() <= 1e-9 * o, "{el:?} {variant:?} {p} {c} {o}");
                }
            }
        }
    }

    #[test]
    fn inverse_ratios() {
        for el in Element::ALL {
            assert!(inverse_ratio(el, 1, InversePair::H1OverL2).unwrap() >= 1.0);
            // p = 2 against a dense generalized eigensolve of (S + M, M), M by quadrature
            let rule = el.rule(8).unwrap();
            let [v, gx, gy] = tabulate_grad(el, 2, &rule.nodes);
            let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&rule.weights));
            let m = v.transpose() * &w * &v;
            let a = gx.transpose() * &w * &gx + gy.transpose() * &w * &gy + &m;
            let (vals, _) = gen_sym_eigen(&a, &m).unwrap();
            let o = libm::sqrt(vals[vals.len() - 1]);
            let r = inverse_ratio(el, 2, InversePair::H1OverL2).unwrap();
            assert!((r - o).abs() <= 1e-9 * o, "{el:?} {r} {o}");
            let s = inverse_sweep(el, &vec![2, 3, 4, 5, 6, 7, 8], InversePair::H1OverL2).unwrap();
            assert!(
                s.growth() <= INVERSE_MAX_GROWTH && s.growth() > 1.0,
                "{el:?} {}",
                s.growth()
            );
            let s = inverse_sweep(el, &vec![2, 3, 4, 5], InversePair::L2OverHMinus1).unwrap();
            assert!(
                s.growth() > 0.5 && s.growth() <= INVERSE_MAX_GROWTH,
                "{el:?} {}",
                s.growth()
            );
        }
    }
}
