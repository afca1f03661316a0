//! Differentiation matrices, scalar bubbles and Raviart-Thomas spaces,
//! all expressed through coefficients in the modal basis of P_p(K).
//! A vector field in (P_p(K))^2 is stored as `[c1; c2]`, length `2 N_p`.

use super::basis::{mode_index, mode_of, scalar_dim, tabulate, tabulate_grad};
use crate::linalg::{null_space, orthonormalize};
use crate::math::sqrt;
use crate::refelem::{gauss_legendre, Element};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub fn bubble_dim(element: Element, p: usize) -> usize {
    match element {
        Element::Triangle if p >= 3 => (p - 1) * (p - 2) / 2,
        Element::Square if p >= 2 => (p - 1) * (p - 1),
        _ => 0,
    }
}

pub fn rt_dim(element: Element, p: usize) -> usize {
    match element {
        Element::Triangle => p * (p + 2),
        Element::Square => 2 * p * (p + 1),
    }
}

pub fn rt_bubble_dim(element: Element, p: usize) -> usize {
    if p == 0 {
        return 0;
    }
    match element {
        Element::Triangle => p * (p - 1),
        Element::Square => 2 * p * (p - 1),
    }
}

pub fn edge_bubble_dim(p: usize) -> usize {
    p.saturating_sub(1)
}

/// `d[k][i] = int_0^1 psi_i' psi_k` for the orthonormal Legendre basis on [0,1].
pub fn legendre01_diff(p: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(p + 1, p + 1);
    for i in 0..=p {
        for k in 0..i {
            if (i - k) % 2 == 1 {
                d[(k, i)] = 2.0 * sqrt((2 * i + 1) as f64) * sqrt((2 * k + 1) as f64);
            }
        }
    }
    d
}

/// Matrices of d/dx1 and d/dx2 acting on modal coefficients of P_p(K).
pub fn diff_matrices(element: Element, p: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = scalar_dim(element, p);
    match element {
        Element::Square => {
            let d = legendre01_diff(p);
            let mut d1 = DMatrix::zeros(n, n);
            let mut d2 = DMatrix::zeros(n, n);
            for col in 0..n {
                let (i, j) = mode_of(element, col);
                for k in 0..i {
                    if d[(k, i)] != 0.0 {
                        d1[(mode_index(element, k, j), col)] = d[(k, i)];
                    }
                }
                for l in 0..j {
                    if d[(l, j)] != 0.0 {
                        d2[(mode_index(element, i, l), col)] = d[(l, j)];
                    }
                }
            }
            (d1, d2)
        }
        Element::Triangle => {
            let rule = element.rule(2 * p).expect("rule within cap");
            let [v, dx, dy] = tabulate_grad(element, p, &rule.nodes);
            let wv = weighted(&v, &rule.weights);
            let mut d1 = wv.transpose() * dx;
            let mut d2 = wv.transpose() * dy;
            // derivatives lower the total degree: clean the exact zeros
            for col in 0..n {
                let (i, j) = mode_of(element, col);
                let lower = scalar_dim(element, (i + j).saturating_sub(1));
                let keep = if i + j == 0 { 0 } else { lower };
                for row in keep..n {
                    d1[(row, col)] = 0.0;
                    d2[(row, col)] = 0.0;
                }
            }
            (d1, d2)
        }
    }
}

/// Rows of `v` scaled by `w`.
pub fn weighted(v: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = v.clone();
    for (r, wr) in w.iter().enumerate() {
        out.row_mut(r).scale_mut(*wr);
    }
    out
}

/// Dirichlet stiffness matrix on P_p(K) in the modal basis.
pub fn stiffness(element: Element, p: usize) -> DMatrix<f64> {
    let (d1, d2) = diff_matrices(element, p);
    d1.transpose() * &d1 + d2.transpose() * &d2
}

/// L2-orthonormal 1D bubbles on [0,1] of degree <= p, as columns of
/// orthonormal-Legendre coefficients; column a has degree a + 2.
pub fn bubbles01(p: usize) -> DMatrix<f64> {
    if p < 2 {
        return DMatrix::zeros(p + 1, 0);
    }
    let mut c = DMatrix::zeros(p + 1, p - 1);
    for k in 2..=p {
        let s = 1.0 / (2.0 * sqrt((2 * k - 1) as f64));
        c[(k, k - 2)] = s / sqrt((2 * k + 1) as f64);
        c[(k - 2, k - 2)] = -s / sqrt((2 * k - 3) as f64);
    }
    orthonormalize(&c)
}

/// L2-orthonormal basis of P^0_p(K) as columns of modal coefficients.
pub fn bubble_basis(element: Element, p: usize) -> DMatrix<f64> {
    let n = scalar_dim(element, p);
    let nb = bubble_dim(element, p);
    if nb == 0 {
        return DMatrix::zeros(n, 0);
    }
    match element {
        Element::Square => {
            let b1 = bubbles01(p);
            let mut out = DMatrix::zeros(n, nb);
            let mut col = 0;
            // order by max degree so smaller bubble spaces are prefixes
            for d in 0..(p - 1) {
                let mut pairs: Vec<(usize, usize)> = (0..=d).map(|b| (d, b)).collect();
                pairs.extend((0..d).map(|a| (a, d)));
                for (a, b) in pairs {
                    for i in 0..=p {
                        if b1[(i, a)] == 0.0 {
                            continue;
                        }
                        for j in 0..=p {
                            out[(mode_index(element, i, j), col)] = b1[(i, a)] * b1[(j, b)];
                        }
                    }
                    col += 1;
                }
            }
            out
        }
        Element::Triangle => {
            let rule = element.rule(2 * p).expect("rule within cap");
            let v = tabulate(element, p, &rule.nodes);
            let low = tabulate(element, p - 3, &rule.nodes);
            let mut seeds = DMatrix::zeros(rule.len(), low.ncols());
            for (r, x) in rule.nodes.iter().enumerate() {
                let l = element.barycentric(*x);
                let b = l[0] * l[1] * l[2];
                for c in 0..low.ncols() {
                    seeds[(r, c)] = b * low[(r, c)];
                }
            }
            let coeffs = weighted(&v, &rule.weights).transpose() * seeds;
            orthonormalize(&coeffs)
        }
    }
}

/// Orthonormal basis of RT_p(K) in (P_p(K))^2 coefficients.
pub fn rt_basis(element: Element, p: usize) -> DMatrix<f64> {
    assert!(p >= 1, "RT order starts at 1");
    let n = scalar_dim(element, p);
    let dim = rt_dim(element, p);
    let mut out = DMatrix::zeros(2 * n, dim);
    match element {
        Element::Square => {
            let mut col = 0;
            for comp in 0..2 {
                for k in 0..n {
                    let (i, j) = mode_of(element, k);
                    let ok = if comp == 0 { j < p } else { i < p };
                    if ok {
                        out[(comp * n + k, col)] = 1.0;
                        col += 1;
                    }
                }
            }
            debug_assert_eq!(col, dim);
        }
        Element::Triangle => {
            let nl = scalar_dim(element, p - 1);
            for k in 0..nl {
                out[(k, k)] = 1.0;
                out[(n + k, nl + k)] = 1.0;
            }
            // x * (homogeneous degree p-1), restricted to the degree-p shell
            let rule = element.rule(2 * p).expect("rule within cap");
            let v = tabulate(element, p, &rule.nodes);
            let wv = weighted(&v, &rule.weights);
            let shell = n - nl;
            let mut extra = DMatrix::zeros(2 * shell, p);
            for k in 0..p {
                let mono =
                    |x: &[f64; 2]| libm::pow(x[0], (p - 1 - k) as f64) * libm::pow(x[1], k as f64);
                let f1 =
                    DVector::from_iterator(rule.len(), rule.nodes.iter().map(|x| x[0] * mono(x)));
                let f2 =
                    DVector::from_iterator(rule.len(), rule.nodes.iter().map(|x| x[1] * mono(x)));
                let c1 = wv.transpose() * f1;
                let c2 = wv.transpose() * f2;
                for s in 0..shell {
                    extra[(s, k)] = c1[nl + s];
                    extra[(shell + s, k)] = c2[nl + s];
                }
            }
            let q = orthonormalize(&extra);
            for k in 0..p {
                for s in 0..shell {
                    out[(nl + s, 2 * nl + k)] = q[(s, k)];
                    out[(n + nl + s, 2 * nl + k)] = q[(shell + s, k)];
                }
            }
        }
    }
    out
}

/// Values of `v . n` at `m` Gauss points on every edge, as a matrix acting
/// on (P_p)^2 coefficients.
pub fn normal_trace_matrix(element: Element, p: usize, m: usize) -> DMatrix<f64> {
    let n = scalar_dim(element, p);
    let (t, _) = gauss_legendre(m);
    let ne = element.num_edges();
    let mut out = DMatrix::zeros(ne * m, 2 * n);
    for e in element.edges() {
        let pts: Vec<[f64; 2]> = t.iter().map(|s| e.point(s * e.length)).collect();
        let v = tabulate(element, p, &pts);
        for r in 0..m {
            for k in 0..n {
                out[(e.index * m + r, k)] = e.normal[0] * v[(r, k)];
                out[(e.index * m + r, n + k)] = e.normal[1] * v[(r, k)];
            }
        }
    }
    out
}

/// Orthonormal basis of the RT bubbles of order p in (P_p)^2 coefficients.
pub fn rt_bubble_basis(element: Element, p: usize) -> DMatrix<f64> {
    let rt = rt_basis(element, p);
    let nt = normal_trace_matrix(element, p, p) * &rt;
    let z = null_space(&nt, 1e-10);
    &rt * z
}

/// Divergence as a map (P_p)^2 -> P_{p-1}.
pub fn div_matrix(element: Element, p: usize, d: &(DMatrix<f64>, DMatrix<f64>)) -> DMatrix<f64> {
    let n = scalar_dim(element, p);
    let nl = scalar_dim(element, p.saturating_sub(1));
    let mut out = DMatrix::zeros(nl, 2 * n);
    out.view_mut((0, 0), (nl, n))
        .copy_from(&d.0.view((0, 0), (nl, n)));
    out.view_mut((0, n), (nl, n))
        .copy_from(&d.1.view((0, 0), (nl, n)));
    out
}

/// Vector curl `(d/dx2, -d/dx1)` as a map P_p -> (P_p)^2.
pub fn curl_matrix(element: Element, p: usize, d: &(DMatrix<f64>, DMatrix<f64>)) -> DMatrix<f64> {
    let n = scalar_dim(element, p);
    let mut out = DMatrix::zeros(2 * n, n);
    out.view_mut((0, 0), (n, n)).copy_from(&d.1);
    out.view_mut((n, 0), (n, n)).copy_from(&(-&d.0));
    out
}
