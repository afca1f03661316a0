//! Boundary stages: lowest-order interpolant, boundary potential, edge
//! projections and the polynomial extension.

use super::data::{edge_legendre, edge_rule};
use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::linalg::spd_solve;
use crate::polyspace::{rt_basis, scalar_dim, tabulate, RtPoly, ScalarPoly};
use crate::refelem::{edge_samples, gauss_legendre, Edge, EdgeSamples, Element};
use crate::sobolev::HarmonicExtension;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Largest tolerated potential mismatch at a vertex.
pub const CLOSURE_TOL: f64 = 1e-8;

/// RT_1 basis with unit flux through one edge and none through the others,
/// as columns of (P_1)^2 coefficients.
pub fn unit_flux_basis(element: Element) -> DMatrix<f64> {
    let b = rt_basis(element, 1);
    let ne = element.num_edges();
    let n1 = scalar_dim(element, 1);
    let (t, w) = gauss_legendre(2);
    let mut flux = DMatrix::zeros(ne, b.ncols());
    for e in element.edges() {
        let pts: Vec<[f64; 2]> = t.iter().map(|s| e.point(s * e.length)).collect();
        let v = tabulate(element, 1, &pts);
        for j in 0..b.ncols() {
            for q in 0..pts.len() {
                let mut un = 0.0;
                for k in 0..n1 {
                    un += v[(q, k)] * (e.normal[0] * b[(k, j)] + e.normal[1] * b[(n1 + k, j)]);
                }
                flux[(e.index, j)] += w[q] * e.length * un;
            }
        }
    }
    let inv = flux
        .try_inverse()
        .expect("RT_1 is unisolvent for edge fluxes");
    b * inv
}

/// `u_1 = sum_l F_l phi_l` from the edge fluxes `F_l = int_l u . n`.
pub fn lowest_order(element: Element, fluxes: &[f64]) -> RtPoly {
    let phi = unit_flux_basis(element);
    let f = DVector::from_column_slice(fluxes);
    RtPoly {
        element,
        order: 1,
        coeffs: phi * f,
    }
}

/// Edge fluxes of a field by (graded) quadrature.
pub fn edge_fluxes(element: Element, u: &dyn VectorField) -> Result<Vec<f64>> {
    element
        .edges()
        .iter()
        .map(|e| {
            let r = edge_rule(e, u.singularity(), u.poly_degree(), 0)?;
            Ok(r.integrate(|_, x| {
                let v = u.value(x);
                v[0] * e.normal[0] + v[1] * e.normal[1]
            }))
        })
        .collect()
}

/// The potential psi on the boundary with tangential derivative `(u - u_1) . n`,
/// anchored to zero at vertex 0 and accumulated counterclockwise.
pub struct BoundaryPotential<'a> {
    pub element: Element,
    field: &'a dyn VectorField,
    u1: RtPoly,
    /// psi at the start vertex of each edge.
    pub anchors: Vec<f64>,
    /// psi at vertex 0 after a full turn.
    pub closure: f64,
}

impl<'a> BoundaryPotential<'a> {
    pub fn new(element: Element, field: &'a dyn VectorField, u1: &RtPoly) -> Result<Self> {
        let mut pot = Self {
            element,
            field,
            u1: u1.clone(),
            anchors: Vec::new(),
            closure: 0.0,
        };
        let mut acc = 0.0;
        for e in element.edges() {
            pot.anchors.push(acc);
            acc += pot.integral(&e, e.length)?;
        }
        pot.closure = acc;
        let defect = pot.vertex_defect();
        if defect > CLOSURE_TOL {
            return Err(Error::InconsistentFlux { defect });
        }
        Ok(pot)
    }

    fn rule(&self, e: &Edge, s: f64) -> Result<EdgeSamples> {
        let cuts = self
            .field
            .singularity()
            .map_or_else(Vec::new, |c| c.edge_cuts(e));
        let deg = self.field.poly_degree().map_or(60, |d| d + 2);
        edge_samples(e, s, &cuts, deg)
    }

    fn integral(&self, e: &Edge, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        let r = self.rule(e, s)?;
        Ok(r.integrate(|_, x| {
            let v = self.field.value(x);
            let w = self.u1.value(x);
            (v[0] - w[0]) * e.normal[0] + (v[1] - w[1]) * e.normal[1]
        }))
    }

    /// psi at arclength `s` along edge `edge`.
    pub fn value(&self, edge: usize, s: f64) -> Result<f64> {
        let e = self.element.edge(edge)?;
        Ok(self.anchors[edge] + self.integral(&e, s.clamp(0.0, e.length))?)
    }

    /// Largest |psi| over the vertices.
    pub fn vertex_defect(&self) -> f64 {
        self.anchors
            .iter()
            .fold(self.closure.abs(), |m, a| m.max(a.abs()))
    }
}

/// `T[j][i] = int_l pi_j(s) int_s^L pi_i` for orthonormal Legendre `pi` on an
/// edge; `int_l psi pi_i = psi(0) int_l pi_i + sum_j T[j][i] int_l psi' pi_j`.
pub fn tail_matrix(n: usize, len: f64) -> DMatrix<f64> {
    let (t, w) = gauss_legendre(n + 1);
    let mut out = DMatrix::zeros(n, n.saturating_sub(1));
    if n < 2 {
        return out;
    }
    for (tq, wq) in t.iter().zip(&w) {
        let s = tq * len;
        let pj = edge_legendre(n - 1, len, s);
        // R_i(s) = int_s^L pi_i, exact with n points for degree <= n-2
        let mut r = alloc::vec![0.0; n - 1];
        for (ti, wi) in t.iter().zip(&w) {
            let x = s + (len - s) * ti;
            for (i, v) in edge_legendre(n - 2, len, x).into_iter().enumerate() {
                r[i] += wi * (len - s) * v;
            }
        }
        for j in 0..n {
            for i in 0..n - 1 {
                out[(j, i)] += wq * len * pj[j] * r[i];
            }
        }
    }
    out
}

/// Minimal-energy polynomial extension of edge bubbles into P_p(K).
#[derive(Clone, Debug)]
pub struct ExtensionOperator {
    pub degree: usize,
    inner: HarmonicExtension,
}

impl ExtensionOperator {
    pub fn new(element: Element, p: usize) -> Result<Self> {
        Ok(Self {
            degree: p,
            inner: HarmonicExtension::new(element, p)?,
        })
    }

    /// Extension of `sum_k c_k chi_{k+2}` from edge `edge`.
    pub fn extend(&self, edge: usize, c: &DVector<f64>) -> ScalarPoly {
        ScalarPoly {
            element: self.inner.element,
            degree: self.degree,
            coeffs: self.inner.extend(edge, c),
        }
    }

    /// Columns: extensions of the Lobatto bubbles of degree 2..=p on `edge`.
    pub fn matrix(&self, edge: usize) -> &DMatrix<f64> {
        &self.inner.per_edge[edge]
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.inner.stiffness
    }
}

/// Vertex interpolation functions (hat functions) as columns in P_p(K).
pub fn vertex_shapes(element: Element, p: usize) -> DMatrix<f64> {
    let rule = element.rule(2 * p.max(2)).expect("rule within cap");
    let v = tabulate(element, p, &rule.nodes);
    let nv = element.vertices().len();
    let mut f = DMatrix::zeros(rule.len(), nv);
    for (r, x) in rule.nodes.iter().enumerate() {
        match element {
            Element::Triangle => {
                let l = element.barycentric(*x);
                for k in 0..3 {
                    f[(r, k)] = l[k];
                }
            }
            Element::Square => {
                let (a, b) = (x[0], x[1]);
                f[(r, 0)] = (1.0 - a) * (1.0 - b);
                f[(r, 1)] = a * (1.0 - b);
                f[(r, 2)] = a * b;
                f[(r, 3)] = (1.0 - a) * b;
            }
        }
    }
    let mut vw = v.clone();
    for (r, w) in rule.weights.iter().enumerate() {
        vw.row_mut(r).scale_mut(*w);
    }
    vw.transpose() * f
}

/// Solves the edge projection `G c = r`, returning `c` and the relative residual.
pub(crate) fn solve_edge(g: &DMatrix<f64>, r: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let m = DMatrix::from_column_slice(r.len(), 1, r.as_slice());
    let c = spd_solve(g, &m)?;
    let c = DVector::from_column_slice(c.as_slice());
    let res = (g * &c - r).norm() / (r.norm() + f64::MIN_POSITIVE);
    Ok((c, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::rt_random;

    #[test]
    fn unit_fluxes() {
        for el in Element::ALL {
            let phi = unit_flux_basis(el);
            for j in 0..el.num_edges() {
                let u = RtPoly {
                    element: el,
                    order: 1,
                    coeffs: phi.column(j).into_owned(),
                };
                let f = edge_fluxes(el, &u).unwrap();
                for (i, fi) in f.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((fi - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn rt1_is_reproduced() {
        for el in Element::ALL {
            let u = rt_random(el, 1, 3);
            let u1 = lowest_order(el, &edge_fluxes(el, &u).unwrap());
            assert!((u1.coeffs - &u.coeffs).amax() < 1e-12);
        }
    }

    #[test]
    fn tail_matrix_integrates_by_parts() {
        // psi(s) = s^3 - s on [0,1], psi' = 3 s^2 - 1
        let n = 6;
        let t = tail_matrix(n, 1.0);
        let (x, w) = gauss_legendre(10);
        let mut mp = DVector::zeros(n);
        let mut want = DVector::zeros(n - 1);
        for (s, ws) in x.iter().zip(&w) {
            let b = edge_legendre(n - 1, 1.0, *s);
            for j in 0..n {
                mp[j] += ws * (3.0 * s * s - 1.0) * b[j];
            }
            for i in 0..n - 1 {
                want[i] += ws * (s * s * s - s) * b[i];
            }
        }
        let got = t.transpose() * mp;
        assert!((got - want).amax() < 1e-14);
    }
}
