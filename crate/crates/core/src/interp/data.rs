//! Reduction of field data to moments against the hierarchical bases.
//!
//! Every stage of the interpolants pairs the data with polynomials only, so
//! the moments against P_n(K) and against the orthonormal Legendre basis of
//! each edge carry all the information needed at degrees below n.

use crate::error::{invalid, Result};
use crate::fields::{ScalarField, ScalarFn, VectorField};
use crate::polyspace::legendre::legendre01;
use crate::polyspace::{scalar_dim, tabulate, tabulate_grad, RtPoly, ScalarPoly};
use crate::refelem::{
    edge_samples, gauss_legendre, singular_rule, Edge, EdgeSamples, Element, QuadRule, Singularity,
};
use crate::sobolev::{dualhalf_norm, DualHalfGram, ErrorNorms};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

const CHUNK: usize = 1024;

/// Extra exactness for non-polynomial integrands.
const EXTRA_DEGREE: usize = 30;

/// Orthonormal Legendre basis of P_n on an edge of length `len`, at arclength `s`.
pub fn edge_legendre(n: usize, len: f64, s: f64) -> Vec<f64> {
    let scale = 1.0 / libm::sqrt(len);
    legendre01(n, s / len)
        .0
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

fn area_rule(
    element: Element,
    singular: Option<Singularity>,
    poly: Option<usize>,
    n: usize,
) -> Result<QuadRule<2>> {
    match poly {
        Some(d) => element.rule(n + d),
        None => singular_rule(element, singular.as_ref(), n + EXTRA_DEGREE),
    }
}

/// Rule on the edge, graded toward where the singular set meets it.
pub(crate) fn edge_rule(
    edge: &Edge,
    singular: Option<Singularity>,
    poly: Option<usize>,
    n: usize,
) -> Result<EdgeSamples> {
    let len = edge.length;
    match poly {
        Some(d) => {
            let (t, w) = gauss_legendre((n + d) / 2 + 1);
            Ok(EdgeSamples {
                s: t.iter().map(|x| x * len).collect(),
                x: t.iter().map(|x| edge.point(x * len)).collect(),
                w: w.iter().map(|x| x * len).collect(),
            })
        }
        None => {
            let cuts = singular.map_or_else(Vec::new, |c| c.edge_cuts(edge));
            edge_samples(edge, len, &cuts, n + EXTRA_DEGREE)
        }
    }
}

/// Moments `int f_k m_i` for columns `f_k` of sampled data and the modes of P_n.
fn area_moments(element: Element, n: usize, rule: &QuadRule<2>, data: &[Vec<f64>]) -> DMatrix<f64> {
    let dim = scalar_dim(element, n);
    let mut out = DMatrix::zeros(dim, data.len());
    let mut start = 0;
    while start < rule.len() {
        let end = (start + CHUNK).min(rule.len());
        let v = tabulate(element, n, &rule.nodes[start..end]);
        let mut f = DMatrix::zeros(end - start, data.len());
        for (k, col) in data.iter().enumerate() {
            for r in start..end {
                f[(r - start, k)] = rule.weights[r] * col[r];
            }
        }
        out += v.transpose() * f;
        start = end;
    }
    out
}

fn edge_moments(
    n: usize,
    edge: &Edge,
    rule: &EdgeSamples,
    f: impl Fn([f64; 2]) -> f64,
) -> DVector<f64> {
    let mut m = DVector::zeros(n + 1);
    for ((s, x), w) in rule.s.iter().zip(&rule.x).zip(&rule.w) {
        let fx = w * f(*x);
        for (k, b) in edge_legendre(n, edge.length, *s).into_iter().enumerate() {
            m[k] += fx * b;
        }
    }
    m
}

/// Moments of a vector field, its divergence and its normal traces.
#[derive(Clone, Debug)]
pub struct VectorData {
    pub element: Element,
    pub degree: usize,
    /// Components in P_n(K).
    pub u: [DVector<f64>; 2],
    pub div: DVector<f64>,
    /// Per edge, moments of `u . n` against orthonormal Legendre up to degree n.
    pub normal: Vec<DVector<f64>>,
    rule: QuadRule<2>,
    values: Vec<[f64; 2]>,
    divs: Vec<f64>,
}

impl VectorData {
    pub fn new(element: Element, field: &dyn VectorField, n: usize) -> Result<Self> {
        let sing = field.singularity();
        let poly = field.poly_degree();
        let rule = area_rule(element, sing, poly, n)?;
        let values: Vec<[f64; 2]> = rule.nodes.iter().map(|x| field.value(*x)).collect();
        let divs: Vec<f64> = rule.nodes.iter().map(|x| field.div(*x)).collect();
        if values
            .iter()
            .any(|v| !v[0].is_finite() || !v[1].is_finite())
            || divs.iter().any(|d| !d.is_finite())
        {
            return Err(invalid("field is not finite at a quadrature node"));
        }
        let cols = [
            values.iter().map(|v| v[0]).collect(),
            values.iter().map(|v| v[1]).collect(),
            divs.clone(),
        ];
        let m = area_moments(element, n, &rule, &cols);
        let mut normal = Vec::new();
        for e in element.edges() {
            let er = edge_rule(&e, sing, poly, n)?;
            normal.push(edge_moments(n, &e, &er, |x| {
                let v = field.value(x);
                v[0] * e.normal[0] + v[1] * e.normal[1]
            }));
        }
        Ok(Self {
            element,
            degree: n,
            u: [m.column(0).into_owned(), m.column(1).into_owned()],
            div: m.column(2).into_owned(),
            normal,
            rule,
            values,
            divs,
        })
    }

    /// L2 projection onto (P_p)^2 as stacked coefficients.
    pub fn ambient(&self, p: usize) -> DVector<f64> {
        let n = scalar_dim(self.element, p);
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&self.u[0].rows(0, n));
        out.rows_mut(n, n).copy_from(&self.u[1].rows(0, n));
        out
    }

    /// Squared L2 norms of `u` and `div u`.
    pub fn norms_sq(&self) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for ((w, v), d) in self.rule.weights.iter().zip(&self.values).zip(&self.divs) {
            a += w * (v[0] * v[0] + v[1] * v[1]);
            b += w * d * d;
        }
        (a, b)
    }

    /// `(||u - v||, ||div u - div v||)` in L2(K).
    pub fn l2_errors(&self, v: &RtPoly) -> (f64, f64) {
        let n = scalar_dim(self.element, v.order);
        let c1 = v.coeffs.rows(0, n);
        let c2 = v.coeffs.rows(n, n);
        let dv = v.divergence();
        let mut a = 0.0;
        let mut b = 0.0;
        let mut start = 0;
        while start < self.rule.len() {
            let end = (start + CHUNK).min(self.rule.len());
            let t = tabulate(self.element, v.order, &self.rule.nodes[start..end]);
            let td = tabulate(self.element, dv.degree, &self.rule.nodes[start..end]);
            let v1 = &t * c1;
            let v2 = &t * c2;
            let vd = td * &dv.coeffs;
            for r in start..end {
                let w = self.rule.weights[r];
                let e1 = self.values[r][0] - v1[r - start];
                let e2 = self.values[r][1] - v2[r - start];
                let ed = self.divs[r] - vd[r - start];
                a += w * (e1 * e1 + e2 * e2);
                b += w * ed * ed;
            }
            start = end;
        }
        (libm::sqrt(a), libm::sqrt(b))
    }

    /// Error norms of `v`. The H-tilde^{-1/2} parts are discrete: the residual
    /// is projected onto P_{p_ref}, p_ref the degree of `gram`.
    pub fn error_norms(&self, v: &RtPoly, gram: &DualHalfGram) -> Result<ErrorNorms> {
        let p_ref = gram.degree;
        if p_ref > self.degree || v.order > p_ref {
            return Err(invalid(
                "reference degree must lie between the interpolant and data degrees",
            ));
        }
        let m = scalar_dim(self.element, p_ref);
        let r = v.raised(p_ref);
        let e1 = self.u[0].rows(0, m) - r.coeffs.rows(0, m);
        let e2 = self.u[1].rows(0, m) - r.coeffs.rows(m, m);
        let dv = v.divergence().raised(p_ref);
        let ed = self.div.rows(0, m) - &dv.coeffs;
        let (l2, div_l2) = self.l2_errors(v);
        Ok(ErrorNorms {
            l2,
            div_l2,
            dualhalf: libm::sqrt(gram.norm_sq_of(&e1) + gram.norm_sq_of(&e2)),
            dualhalf_div: dualhalf_norm(gram, &ed),
        })
    }
}

/// Moments of a scalar function, its trace, and optionally its gradient.
#[derive(Clone, Debug)]
pub struct ScalarData {
    pub element: Element,
    pub degree: usize,
    pub f: DVector<f64>,
    pub grad: Option<[DVector<f64>; 2]>,
    /// Per edge, moments of the trace against orthonormal Legendre up to degree n.
    pub trace: Vec<DVector<f64>>,
    pub vertex_values: Vec<f64>,
    rule: QuadRule<2>,
    values: Vec<f64>,
    grads: Option<Vec<[f64; 2]>>,
}

impl ScalarData {
    /// Data for the L2 and H-tilde^{-1/2} projectors.
    pub fn from_fn(element: Element, f: &dyn ScalarFn, n: usize) -> Result<Self> {
        Self::build(element, f, None, n)
    }

    /// Data for the H1 interpolant, with gradient moments.
    pub fn from_field(element: Element, g: &dyn ScalarField, n: usize) -> Result<Self> {
        Self::build(element, g, Some(&|x| g.grad(x)), n)
    }

    fn build(
        element: Element,
        f: &dyn ScalarFn,
        grad: Option<&dyn Fn([f64; 2]) -> [f64; 2]>,
        n: usize,
    ) -> Result<Self> {
        let sing = f.singularity();
        let poly = f.poly_degree();
        let rule = area_rule(element, sing, poly, n)?;
        let values: Vec<f64> = rule.nodes.iter().map(|x| f.value(*x)).collect();
        let grads: Option<Vec<[f64; 2]>> = grad.map(|g| rule.nodes.iter().map(|x| g(*x)).collect());
        if values.iter().any(|v| !v.is_finite())
            || grads
                .as_ref()
                .is_some_and(|g| g.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()))
        {
            return Err(invalid("function is not finite at a quadrature node"));
        }
        let mut cols = alloc::vec![values.clone()];
        if let Some(g) = &grads {
            cols.push(g.iter().map(|v| v[0]).collect());
            cols.push(g.iter().map(|v| v[1]).collect());
        }
        let m = area_moments(element, n, &rule, &cols);
        let mut trace = Vec::new();
        for e in element.edges() {
            let er = edge_rule(&e, sing, poly, n)?;
            trace.push(edge_moments(n, &e, &er, |x| f.value(x)));
        }
        Ok(Self {
            element,
            degree: n,
            f: m.column(0).into_owned(),
            grad: grads
                .as_ref()
                .map(|_| [m.column(1).into_owned(), m.column(2).into_owned()]),
            trace,
            vertex_values: element.vertices().iter().map(|v| f.value(*v)).collect(),
            rule,
            values,
            grads,
        })
    }

    pub fn projection(&self, p: usize) -> DVector<f64> {
        self.f.rows(0, scalar_dim(self.element, p)).into_owned()
    }

    /// `(||f - q||_{L2}, |f - q|_{H1})`; the seminorm is NaN without gradient data.
    pub fn errors(&self, q: &ScalarPoly) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut start = 0;
        while start < self.rule.len() {
            let end = (start + CHUNK).min(self.rule.len());
            let [t, tx, ty] = tabulate_grad(self.element, q.degree, &self.rule.nodes[start..end]);
            let v = t * &q.coeffs;
            let gx = tx * &q.coeffs;
            let gy = ty * &q.coeffs;
            for r in start..end {
                let w = self.rule.weights[r];
                let e = self.values[r] - v[r - start];
                a += w * e * e;
                if let Some(g) = &self.grads {
                    let ex = g[r][0] - gx[r - start];
                    let ey = g[r][1] - gy[r - start];
                    b += w * (ex * ex + ey * ey);
                }
            }
            start = end;
        }
        let semi = if self.grads.is_some() {
            libm::sqrt(b)
        } else {
            f64::NAN
        };
        (libm::sqrt(a), semi)
    }

    /// Discrete H-tilde^{-1/2} norm of `f - q` at the degree of `gram`.
    pub fn dualhalf_error(&self, q: &ScalarPoly, gram: &DualHalfGram) -> Result<f64> {
        let p_ref = gram.degree;
        if p_ref > self.degree || q.degree > p_ref {
            return Err(invalid(
                "reference degree must lie between the projection and data degrees",
            ));
        }
        let mut e = self.projection(p_ref);
        for (i, c) in q.coeffs.iter().enumerate() {
            e[i] -= c;
        }
        Ok(dualhalf_norm(gram, &e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{rt_random, FnScalar, SmoothTrig};
    use crate::math::PI;

    #[test]
    fn polynomial_data_is_reproduced_by_its_moments() {
        for el in Element::ALL {
            let u = rt_random(el, 3, 11);
            let d = VectorData::new(el, &u, 5).unwrap();
            let amb = d.ambient(3);
            assert!((amb - &u.coeffs).amax() < 1e-13);
            let back = RtPoly {
                element: el,
                order: 3,
                coeffs: d.ambient(3),
            };
            let (a, b) = d.l2_errors(&back);
            assert!(a < 1e-13 && b < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn edge_moments_give_fluxes() {
        let d = VectorData::new(Element::Square, &SmoothTrig, 8).unwrap();
        // right edge x1 = 1: u.n = sin(pi) cos(pi x2) = 0; top edge: u.n = x1
        assert!(d.normal[1][0].abs() < 1e-14);
        assert!((d.normal[2][0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_moments_match_mean() {
        // f = rho^(-0.4) about (0.5, 0): mean via the fan oracle in polar form
        let f = FnScalar {
            f: |x: [f64; 2]| libm::pow((x[0] - 0.5) * (x[0] - 0.5) + x[1] * x[1], -0.2),
            singularity: Some(Singularity::Point([0.5, 0.0])),
            degree: None,
        };
        let d = ScalarData::from_fn(Element::Square, &f, 6).unwrap();
        // int over the half disc-fan: sum of three triangles, by 1D adaptive oracle
        let beta = -0.4;
        let tri = |a: [f64; 2], b: [f64; 2]| {
            // int_0^1 int_0^1 r^(beta+1) |d(t)|^beta dr dt * det
            let g = gauss_legendre(200);
            let da = [a[0] - 0.5, a[1]];
            let db = [b[0] - 0.5, b[1]];
            let det = (da[0] * db[1] - da[1] * db[0]).abs();
            let mut s = 0.0;
            for (t, w) in g.0.iter().zip(&g.1) {
                let dd = [(1.0 - t) * da[0] + t * db[0], (1.0 - t) * da[1] + t * db[1]];
                s += w * libm::pow(dd[0] * dd[0] + dd[1] * dd[1], 0.5 * beta);
            }
            s * det / (beta + 2.0)
        };
        let want =
            tri([1.0, 0.0], [1.0, 1.0]) + tri([1.0, 1.0], [0.0, 1.0]) + tri([0.0, 1.0], [0.0, 0.0]);
        assert!((d.f[0] - want).abs() < 1e-11, "{} {want}", d.f[0]);
        let _ = PI;
    }
}
