//! Discrete harmonic extensions of edge bubbles and the H-tilde^{1/2}(l) Gram.

use crate::error::{invalid, Result};
use crate::linalg::spd_solve;
use crate::polyspace::legendre::{legendre01, lobatto01};
use crate::polyspace::spaces::{bubble_basis, stiffness, weighted};
use crate::polyspace::tabulate;
use crate::refelem::{gauss_legendre, Edge, Element};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Value at `x` of the blended extension of every Lobatto bubble 2..=n on `edge`:
/// homogenized in barycentrics on T, `chi(t) (1 - d)` on Q.
fn blended_at(element: Element, edge: &Edge, n: usize, x: [f64; 2]) -> Vec<f64> {
    match element {
        Element::Triangle => {
            let l = element.barycentric(x);
            let la = l[edge.index];
            let lb = l[(edge.index + 1) % 3];
            let s = la + lb;
            if s <= 1e-300 {
                return alloc::vec![0.0; n.saturating_sub(1)];
            }
            let chi = lobatto01(n, lb / s);
            chi.iter()
                .enumerate()
                .map(|(i, c)| c * libm::pow(s, (i + 2) as f64))
                .collect()
        }
        Element::Square => {
            let t = edge.arclength_of(x) / edge.length;
            let d = -((x[0] - edge.a[0]) * edge.normal[0] + (x[1] - edge.a[1]) * edge.normal[1]);
            lobatto01(n, t).into_iter().map(|c| c * (1.0 - d)).collect()
        }
    }
}

/// Modal coefficients in P_n(K) of the blended extensions of Lobatto 2..=n.
pub fn blended_extensions(element: Element, edge: &Edge, n: usize) -> DMatrix<f64> {
    let rule = element.rule(2 * n).expect("rule within cap");
    let v = tabulate(element, n, &rule.nodes);
    let mut f = DMatrix::zeros(rule.len(), n.saturating_sub(1));
    for (r, x) in rule.nodes.iter().enumerate() {
        for (c, val) in blended_at(element, edge, n, *x).into_iter().enumerate() {
            f[(r, c)] = val;
        }
    }
    weighted(&v, &rule.weights).transpose() * f
}

/// Minimal H1-seminorm extensions into P_n(K) of the Lobatto bubbles on each edge.
#[derive(Clone, Debug)]
pub struct HarmonicExtension {
    pub element: Element,
    pub degree: usize,
    /// Per edge, `N_n x (n-1)` modal coefficients of the extensions.
    pub per_edge: Vec<DMatrix<f64>>,
    /// Per edge, the blended (non-minimal) extensions.
    pub blended: Vec<DMatrix<f64>>,
    pub stiffness: DMatrix<f64>,
    pub bubbles: DMatrix<f64>,
}

impl HarmonicExtension {
    pub fn new(element: Element, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("extension degree must be at least 2"));
        }
        let s = stiffness(element, n);
        let b = bubble_basis(element, n);
        let sb = b.transpose() * &s * &b;
        let mut per_edge = Vec::new();
        let mut blended = Vec::new();
        for e in element.edges() {
            let raw = blended_extensions(element, &e, n);
            let corr = if b.ncols() > 0 {
                let rhs = b.transpose() * &s * &raw;
                &b * spd_solve(&sb, &rhs)?
            } else {
                DMatrix::zeros(raw.nrows(), raw.ncols())
            };
            per_edge.push(&raw - corr);
            blended.push(raw);
        }
        Ok(Self {
            element,
            degree: n,
            per_edge,
            blended,
            stiffness: s,
            bubbles: b,
        })
    }

    /// Extension of `sum_k c_k chi_{k+2}` on edge `e` (c may be shorter than n-1).
    pub fn extend(&self, e: usize, c: &DVector<f64>) -> DVector<f64> {
        self.per_edge[e].columns(0, c.len()) * c
    }
}

/// Gram of the discrete H-tilde^{1/2}(l) inner product on the edge bubbles
/// of degree p, with flux representers `rho_k` on the edge such that
/// `<f, chi_k> = int_l f rho_k` reproduces the Gram on polynomial traces.
#[derive(Clone, Debug)]
pub struct EdgeH12Gram {
    pub element: Element,
    pub edge: Edge,
    pub degree: usize,
    pub lift_degree: usize,
    pub matrix: DMatrix<f64>,
    /// `N_n x (p-1)` lifts.
    pub lifts: DMatrix<f64>,
    /// `(n-1) x (p-1)` coefficients of rho_k in orthonormal Legendre on the edge.
    pub flux: DMatrix<f64>,
}

impl EdgeH12Gram {
    pub fn new(element: Element, edge: usize, p: usize, lift_degree: usize) -> Result<Self> {
        let ext = HarmonicExtension::new(element, lift_degree.max(2))?;
        Self::from_extension(&ext, edge, p)
    }

    pub fn from_extension(ext: &HarmonicExtension, edge: usize, p: usize) -> Result<Self> {
        let n = ext.degree;
        if p < 2 {
            return Err(invalid("edge bubble space is empty for p < 2"));
        }
        if n < p {
            return Err(invalid("lift degree below edge degree"));
        }
        let e = ext.element.edge(edge)?;
        let lifts = ext.per_edge[edge].columns(0, p - 1).into_owned();
        let sw = &ext.stiffness * &lifts;
        let matrix = lifts.transpose() * &sw;
        let matrix = 0.5 * (&matrix + matrix.transpose());
        // F[j,k] = a(E chi_j, w_k) over all test bubbles of degree <= n
        let f = ext.blended[edge].transpose() * &sw;
        // M[j,i] = int_l chi_j pi_i, pi_i orthonormal Legendre of degree <= n-2
        let (t, w) = gauss_legendre(n + 1);
        let mut m = DMatrix::zeros(n - 1, n - 1);
        for (tq, wq) in t.iter().zip(&w) {
            let chi = lobatto01(n, *tq);
            let (pi, _) = legendre01(n - 2, *tq);
            for j in 0..n - 1 {
                for i in 0..n - 1 {
                    m[(j, i)] += wq * e.length * chi[j] * pi[i] / libm::sqrt(e.length);
                }
            }
        }
        let flux = m
            .lu()
            .solve(&f)
            .ok_or_else(|| invalid("singular edge moment matrix"))?;
        Ok(Self {
            element: ext.element,
            edge: e,
            degree: p,
            lift_degree: n,
            matrix,
            lifts,
            flux,
        })
    }

    pub fn dim(&self) -> usize {
        self.degree - 1
    }

    /// Values of every flux representer at arclength `s`.
    pub fn flux_at(&self, s: f64) -> DVector<f64> {
        let n = self.lift_degree;
        let (pi, _) = legendre01(n - 2, s / self.edge.length);
        let pi = DVector::from_iterator(
            n - 1,
            pi.into_iter().map(|v| v / libm::sqrt(self.edge.length)),
        );
        self.flux.transpose() * pi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{asymmetry, max_abs, sym_eigen};

    #[test]
    fn extension_traces_and_harmonicity() {
        for el in Element::ALL {
            let n = 7;
            let ext = HarmonicExtension::new(el, n).unwrap();
            for e in el.edges() {
                let w = &ext.per_edge[e.index];
                // discrete harmonicity
                let r = ext.bubbles.transpose() * &ext.stiffness * w;
                assert!(max_abs(&r) < 1e-10);
                // traces: Lobatto on the source edge, zero elsewhere
                for f in el.edges() {
                    for k in 0..=8 {
                        let s = k as f64 / 8.0;
                        let x = f.point(s);
                        let vals = tabulate(el, n, &[x]) * w;
                        let want = if f.index == e.index {
                            lobatto01(n, s)
                        } else {
                            alloc::vec![0.0; n - 1]
                        };
                        for c in 0..n - 1 {
                            assert!(
                                (vals[(0, c)] - want[c]).abs() < 1e-10,
                                "{el:?} {} {} {c}",
                                e.index,
                                f.index
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn edge_gram_spd_and_flux_reproduces() {
        for el in Element::ALL {
            for p in 2..=8 {
                let g = EdgeH12Gram::new(el, 0, p, p + 6).unwrap();
                assert!(asymmetry(&g.matrix) < 1e-12);
                let (v, _) = sym_eigen(&g.matrix);
                assert!(v[0] > 0.0);
                // int_l chi_j rho_k = G_jk
                let (t, w) = gauss_legendre(p + 8);
                let mut acc = DMatrix::zeros(p - 1, p - 1);
                for (tq, wq) in t.iter().zip(&w) {
                    let chi = lobatto01(p, *tq);
                    let rho = g.flux_at(*tq);
                    for j in 0..p - 1 {
                        for k in 0..p - 1 {
                            acc[(j, k)] += wq * chi[j] * rho[k];
                        }
                    }
                }
                assert!(max_abs(&(acc - &g.matrix)) < 1e-10, "{el:?} {p}");
            }
        }
    }
}
