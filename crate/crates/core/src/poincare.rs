//! Regularized Poincare integral operators R (scalar -> vector) and
//! A (vector -> scalar), the regular decomposition they induce, and a right
//! inverse of the divergence onto RT bubbles.
//!
//! For a base point `a` the classical operators satisfy `div R_a = id` and
//! `curl A_a = id` on divergence-free fields, and they map polynomials to
//! polynomials. Averaging over any probability measure on the ball keeps all
//! of this, so the discrete bump measure is normalized to sum to exactly one
//! and the properties hold to rounding.

use crate::error::{invalid, Error, Result};
use crate::fields::{DivOf, ScalarFn, VectorField};
use crate::interp::{vertex_shapes, ExtensionOperator};
use crate::linalg::spd_solve;
use crate::math::{cos, exp, sin, sqrt, PI};
use crate::polyspace::legendre::lobatto01;
use crate::polyspace::spaces::{curl_matrix, diff_matrices, rt_basis};
use crate::polyspace::{scalar_dim, tabulate, RtPoly, ScalarPoly};
use crate::refelem::{gauss_legendre, Element, QuadRule};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative least-squares residual that certifies polynomial membership.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// `eta(t) = exp(-1/(1-t^2))` on |t| < 1, zero elsewhere.
pub fn eta(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        exp(-1.0 / (1.0 - t * t))
    }
}

/// `theta(a) = eta(|a - c| / radius) / z` with unit integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingBump {
    pub center: [f64; 2],
    pub radius: f64,
    /// `int_B eta(|a - c| / radius) da`, by a 1D rule in the radius.
    pub z: f64,
}

impl SmoothingBump {
    pub fn new(element: Element, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !element.contains(center, 0.0) {
            return Err(invalid(
                "bump centre must lie in K and the radius be positive",
            ));
        }
        let clearance = element
            .edges()
            .iter()
            .map(|e| e.distance(center))
            .fold(f64::INFINITY, f64::min);
        if clearance <= radius {
            return Err(invalid("closed bump support must lie inside K"));
        }
        // 2 pi r^2 int_0^1 eta(t) t dt, the integrand flat at t = 1
        let (t, w) = gauss_legendre(200);
        let z = 2.0
            * PI
            * radius
            * radius
            * t.iter().zip(&w).map(|(t, w)| w * eta(*t) * t).sum::<f64>();
        Ok(Self { center, radius, z })
    }

    /// Incentre of T with radius 0.2; centre of Q with radius 0.3.
    pub fn default_for(element: Element) -> Self {
        let (c, r) = match element {
            Element::Triangle => ([0.5, crate::math::SQRT3 / 6.0], 0.2),
            Element::Square => ([0.5, 0.5], 0.3),
        };
        Self::new(element, c, r).expect("default bump lies inside K")
    }

    pub fn value(&self, a: [f64; 2]) -> f64 {
        let d = [a[0] - self.center[0], a[1] - self.center[1]];
        eta(sqrt(d[0] * d[0] + d[1] * d[1]) / self.radius) / self.z
    }
}

/// Bump plus the quadrature used for the a- and t-integrals.
#[derive(Clone, Debug)]
pub struct PoincareConfig {
    pub element: Element,
    pub bump: SmoothingBump,
    pub radial: usize,
    pub angular: usize,
    pub t_points: usize,
    /// Discrete measure on B: nodes and weights summing to one.
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    t_rule: (Vec<f64>, Vec<f64>),
}

impl PoincareConfig {
    pub fn new(
        element: Element,
        bump: SmoothingBump,
        radial: usize,
        angular: usize,
        t_points: usize,
    ) -> Result<Self> {
        if radial == 0 || angular == 0 || t_points == 0 {
            return Err(invalid("quadrature sizes must be positive"));
        }
        let (r, wr) = gauss_legendre(radial);
        let mut nodes = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        let dphi = 2.0 * PI / angular as f64;
        for (ri, wi) in r.iter().zip(&wr) {
            let rho = ri * bump.radius;
            for k in 0..angular {
                let phi = k as f64 * dphi;
                let a = [
                    bump.center[0] + rho * cos(phi),
                    bump.center[1] + rho * sin(phi),
                ];
                nodes.push(a);
                weights.push(wi * bump.radius * rho * dphi * bump.value(a));
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self {
            element,
            bump,
            radial,
            angular,
            t_points,
            nodes,
            weights,
            t_rule: gauss_legendre(t_points),
        })
    }

    /// Default bump, 24 x 48 polar rule on B, 32-point Gauss in t.
    pub fn default_for(element: Element) -> Self {
        Self::new(element, SmoothingBump::default_for(element), 24, 48, 32)
            .expect("default sizes are valid")
    }

    /// `int_B theta` by the polar rule before normalization, relative to `z`.
    pub fn raw_mass(&self) -> f64 {
        let (r, wr) = gauss_legendre(self.radial);
        let b = &self.bump;
        let mut s = 0.0;
        for (ri, wi) in r.iter().zip(&wr) {
            s += wi * b.radius * ri * b.radius * 2.0 * PI * eta(*ri);
        }
        s / b.z
    }

    /// First moment of the discrete measure (equals the bump centre by symmetry).
    pub fn barycenter(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (a, w) in self.nodes.iter().zip(&self.weights) {
            m[0] += w * a[0];
            m[1] += w * a[1];
        }
        m
    }
}

/// `R psi (x)`.
pub fn apply_r(psi: &dyn ScalarFn, x: [f64; 2], cfg: &PoincareConfig) -> [f64; 2] {
    let (t, wt) = &cfg.t_rule;
    let mut out = [0.0; 2];
    for (a, wa) in cfg.nodes.iter().zip(&cfg.weights) {
        let d = [x[0] - a[0], x[1] - a[1]];
        let mut inner = 0.0;
        for (ti, wi) in t.iter().zip(wt) {
            inner += wi * ti * psi.value([a[0] + ti * d[0], a[1] + ti * d[1]]);
        }
        out[0] += wa * d[0] * inner;
        out[1] += wa * d[1] * inner;
    }
    out
}

/// `A u (x)`.
pub fn apply_a(u: &dyn VectorField, x: [f64; 2], cfg: &PoincareConfig) -> f64 {
    let (t, wt) = &cfg.t_rule;
    let mut out = 0.0;
    for (a, wa) in cfg.nodes.iter().zip(&cfg.weights) {
        let d = [x[0] - a[0], x[1] - a[1]];
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for (ti, wi) in t.iter().zip(wt) {
            let v = u.value([a[0] + ti * d[0], a[1] + ti * d[1]]);
            i1 += wi * v[0];
            i2 += wi * v[1];
        }
        out += wa * (d[1] * i1 - d[0] * i2);
    }
    out
}

/// R and A restricted to polynomials of degree p, as matrices on modal
/// coefficients, with the fit residuals that certify their ranges.
#[derive(Clone, Debug)]
pub struct PoincarePoly {
    pub element: Element,
    pub p: usize,
    /// `P_p -> RT_{p+1}`, values in (P_{p+1})^2 coefficients.
    pub r: DMatrix<f64>,
    /// `RT_p -> P_p`, acting on (P_p)^2 coefficients of RT fields.
    pub a: DMatrix<f64>,
    pub r_residual: f64,
    pub a_residual: f64,
}

/// Rows `x -> sum_a sum_t w (weights(x, a, t)) * modes(a + t (x - a))` for
/// every sample x, one matrix per weight function.
fn sampled<const M: usize>(
    cfg: &PoincareConfig,
    degree: usize,
    samples: &[[f64; 2]],
    t_points: usize,
    weight: impl Fn([f64; 2], f64) -> [f64; M],
) -> [DMatrix<f64>; M] {
    let (t, wt) = gauss_legendre(t_points);
    let n = scalar_dim(cfg.element, degree);
    let mut out: [DMatrix<f64>; M] = core::array::from_fn(|_| DMatrix::zeros(samples.len(), n));
    let per = cfg.nodes.len() * t.len();
    let mut pts = Vec::with_capacity(per);
    let mut ws: [Vec<f64>; M] = core::array::from_fn(|_| Vec::with_capacity(per));
    for (row, x) in samples.iter().enumerate() {
        pts.clear();
        for w in ws.iter_mut() {
            w.clear();
        }
        for (a, wa) in cfg.nodes.iter().zip(&cfg.weights) {
            let d = [x[0] - a[0], x[1] - a[1]];
            for (ti, wi) in t.iter().zip(&wt) {
                pts.push([a[0] + ti * d[0], a[1] + ti * d[1]]);
                let f = weight(d, *ti);
                for m in 0..M {
                    ws[m].push(wa * wi * f[m]);
                }
            }
        }
        let v = tabulate(cfg.element, degree, &pts);
        for m in 0..M {
            let w = DVector::from_column_slice(&ws[m]);
            out[m]
                .row_mut(row)
                .copy_from(&(v.transpose() * w).transpose());
        }
    }
    out
}

/// L2 projection of sampled columns onto the orthonormal modes `v`.
fn fit(values: &DMatrix<f64>, v: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut vw = v.clone();
    for (r, w) in weights.iter().enumerate() {
        vw.row_mut(r).scale_mut(*w);
    }
    vw.transpose() * values
}

fn weighted_norm(col: impl Iterator<Item = f64>, weights: &[f64]) -> f64 {
    sqrt(col.zip(weights).map(|(x, w)| w * x * x).sum::<f64>())
}

impl PoincarePoly {
    pub fn new(cfg: &PoincareConfig, p: usize) -> Result<Self> {
        let el = cfg.element;
        // exact in t: Q_p holds total degree 2p
        let total = match el {
            Element::Triangle => p,
            Element::Square => 2 * p,
        };
        let nt = total / 2 + 2;
        let rule: QuadRule<2> = el.rule(2 * (p + 2))?;
        let vq = tabulate(el, p + 1, &rule.nodes);
        let n1 = scalar_dim(el, p + 1);
        let n0 = scalar_dim(el, p);

        // R: P_p -> (P_{p+1})^2, fitted onto RT_{p+1}
        let [r1, r2] = sampled::<2>(cfg, p, &rule.nodes, nt, |d, t| [t * d[0], t * d[1]]);
        let c1 = fit(&r1, &vq, &rule.weights);
        let c2 = fit(&r2, &vq, &rule.weights);
        let mut amb = DMatrix::zeros(2 * n1, n0);
        amb.view_mut((0, 0), (n1, n0)).copy_from(&c1);
        amb.view_mut((n1, 0), (n1, n0)).copy_from(&c2);
        let rt = rt_basis(el, p + 1);
        let r = &rt * (rt.transpose() * &amb);
        // relative to the largest image: columns can vanish (A(x - c) = 0)
        let (mut r_err, mut r_scale) = (0.0f64, 0.0f64);
        for j in 0..n0 {
            let fit1 = &vq * r.view((0, j), (n1, 1));
            let fit2 = &vq * r.view((n1, j), (n1, 1));
            let e = weighted_norm((0..rule.len()).map(|i| r1[(i, j)] - fit1[i]), &rule.weights)
                + weighted_norm((0..rule.len()).map(|i| r2[(i, j)] - fit2[i]), &rule.weights);
            let s = weighted_norm(r1.column(j).iter().copied(), &rule.weights)
                + weighted_norm(r2.column(j).iter().copied(), &rule.weights);
            r_err = r_err.max(e);
            r_scale = r_scale.max(s);
        }
        let r_residual = r_err / r_scale.max(f64::MIN_POSITIVE);

        // A: RT_p -> P_p
        let (a, a_residual) = if p == 0 {
            (DMatrix::zeros(1, 0), 0.0)
        } else {
            let [a1, a2] = sampled::<2>(cfg, p, &rule.nodes, nt, |d, _| [d[1], -d[0]]);
            let mut samp = DMatrix::zeros(rule.len(), 2 * n0);
            samp.columns_mut(0, n0).copy_from(&a1);
            samp.columns_mut(n0, n0).copy_from(&a2);
            let rtp = rt_basis(el, p);
            let vals = samp * &rtp;
            let vp = vq.columns(0, n0).into_owned();
            let coef = fit(&vals, &vp, &rule.weights);
            let (mut err, mut scale) = (0.0f64, 0.0f64);
            for j in 0..vals.ncols() {
                let f = &vp * coef.column(j);
                let e = weighted_norm((0..rule.len()).map(|i| vals[(i, j)] - f[i]), &rule.weights);
                let s = weighted_norm(vals.column(j).iter().copied(), &rule.weights);
                err = err.max(e);
                scale = scale.max(s);
            }
            // back to (P_p)^2 coefficients: rt is orthonormal
            (coef * rtp.transpose(), err / scale.max(f64::MIN_POSITIVE))
        };
        Ok(Self {
            element: el,
            p,
            r,
            a,
            r_residual,
            a_residual,
        })
    }

    /// `R psi` for psi of degree <= p.
    pub fn r_of(&self, psi: &ScalarPoly) -> Result<RtPoly> {
        if psi.degree > self.p {
            return Err(invalid("scalar degree above the operator degree"));
        }
        let c = psi.raised(self.p).coeffs;
        Ok(RtPoly {
            element: self.element,
            order: self.p + 1,
            coeffs: &self.r * c,
        })
    }

    /// `A u` for u in RT_p; components outside RT_p are ignored.
    pub fn a_of(&self, u: &RtPoly) -> Result<ScalarPoly> {
        if u.order > self.p || self.p == 0 {
            return Err(invalid("field order above the operator degree"));
        }
        Ok(ScalarPoly {
            element: self.element,
            degree: self.p,
            coeffs: &self.a * u.raised(self.p).coeffs,
        })
    }
}

fn certify(residual: f64) -> Result<()> {
    if residual > MEMBERSHIP_TOL {
        Err(Error::MembershipViolation {
            residual,
            threshold: MEMBERSHIP_TOL,
        })
    } else {
        Ok(())
    }
}

/// `R psi` as an element of RT_{p+1}, certified by the fit residual.
pub fn r_poly(psi: &ScalarPoly, cfg: &PoincareConfig) -> Result<RtPoly> {
    let ops = PoincarePoly::new(cfg, psi.degree)?;
    certify(ops.r_residual)?;
    ops.r_of(psi)
}

/// `A u` as an element of P_p for u in RT_p, certified by the fit residual.
pub fn a_poly(u: &RtPoly, cfg: &PoincareConfig) -> Result<ScalarPoly> {
    let ops = PoincarePoly::new(cfg, u.order)?;
    certify(ops.a_residual)?;
    ops.a_of(u)
}

/// `u = curl psi + v` with `v = R(div u)` and `psi = A u`.
///
/// `A(u - v)` and `A u` differ by a constant (`curl A R f = 0` follows from
/// the homotopy identity `w = curl A w + R div w`), so `curl psi` is the
/// same and the nested integral `A R` is never formed.
pub struct Decomposition<'a> {
    pub field: &'a dyn VectorField,
    pub cfg: &'a PoincareConfig,
}

impl<'a> Decomposition<'a> {
    pub fn new(field: &'a dyn VectorField, cfg: &'a PoincareConfig) -> Self {
        Self { field, cfg }
    }

    pub fn v(&self, x: [f64; 2]) -> [f64; 2] {
        apply_r(&DivOf(self.field), x, self.cfg)
    }

    pub fn psi(&self, x: [f64; 2]) -> f64 {
        apply_a(self.field, x, self.cfg)
    }

    /// `curl psi` by centred differences of step h.
    pub fn curl_psi(&self, x: [f64; 2], h: f64) -> [f64; 2] {
        let dy = (self.psi([x[0], x[1] + h]) - self.psi([x[0], x[1] - h])) / (2.0 * h);
        let dx = (self.psi([x[0] + h, x[1]]) - self.psi([x[0] - h, x[1]])) / (2.0 * h);
        [dy, -dx]
    }
}

/// `(||v||, ||div u||)` in L2(K) for `v = R(div u)`, by a rule of the given
/// degree (graded at the field's singular set).
pub fn decomposition_norms(
    u: &dyn VectorField,
    cfg: &PoincareConfig,
    degree: usize,
) -> Result<(f64, f64)> {
    let s = u.singularity();
    let rule = crate::refelem::singular_rule(cfg.element, s.as_ref(), degree)?;
    let div = DivOf(u);
    let (mut nv, mut nd) = (0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = apply_r(&div, *x, cfg);
        nv += w * (v[0] * v[0] + v[1] * v[1]);
        let d = div.value(*x);
        nd += w * d * d;
    }
    Ok((sqrt(nv), sqrt(nd)))
}

/// `T psi = R psi - curl phi` in the RT bubbles of order p with `div T psi = psi`,
/// for mean-zero psi of degree <= p - 1. phi is the minimal-energy extension of
/// the boundary potential of `(R psi) . n`.
pub fn right_inverse_div(psi: &ScalarPoly, p: usize, cfg: &PoincareConfig) -> Result<RtPoly> {
    let el = cfg.element;
    if p == 0 || psi.degree + 1 > p {
        return Err(invalid("psi must have degree at most p - 1"));
    }
    // the constant mode carries the mean
    let mean = psi.coeffs[0] / sqrt(el.area());
    if psi.coeffs[0].abs() > 1e-10 * psi.coeffs.norm().max(1.0) {
        return Err(Error::NonZeroMean { mean });
    }
    let ops = PoincarePoly::new(cfg, p - 1)?;
    certify(ops.r_residual)?;
    let v = ops.r_of(psi)?;
    let n = scalar_dim(el, p);
    let mut phi = DVector::zeros(n);
    let hats = vertex_shapes(el, p);
    let (tq, wq) = gauss_legendre(p + 1);
    let mut at_vertex = 0.0;
    let ext = if p >= 2 {
        Some(ExtensionOperator::new(el, p)?)
    } else {
        None
    };
    for e in el.edges() {
        let len = e.length;
        let flux: f64 = tq
            .iter()
            .zip(&wq)
            .map(|(t, w)| w * len * v.normal_trace(&e, t * len))
            .sum();
        phi += hats.column(e.index) * at_vertex;
        if let Some(ext) = &ext {
            // potential minus its linear part, sampled at Gauss points of [0, L]
            let mut rhs = DVector::zeros(tq.len());
            let mut basis = DMatrix::zeros(tq.len(), p - 1);
            for (k, t) in tq.iter().enumerate() {
                let s = t * len;
                let inner: f64 = tq
                    .iter()
                    .zip(&wq)
                    .map(|(u, w)| w * s * v.normal_trace(&e, u * s))
                    .sum();
                rhs[k] = inner - t * flux;
                for (j, c) in lobatto01(p, *t).into_iter().enumerate() {
                    basis[(k, j)] = c;
                }
            }
            let c = spd_solve(
                &(basis.transpose() * &basis),
                &(basis.transpose() * DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice())),
            )?;
            phi += ext.extend(e.index, &c.column(0).into_owned()).coeffs;
        }
        at_vertex += flux;
    }
    let curl = curl_matrix(el, p, &diff_matrices(el, p));
    let coeffs = v.raised(p).coeffs - curl * phi;
    Ok(RtPoly {
        element: el,
        order: p,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{poly_random, rt_random, CurlOf, FnScalar};
    use alloc::sync::Arc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(el: Element, n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < n {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            if el.contains(x, -0.01) {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn bump_is_normalized() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            // the 24-point radial rule alone is good to ~5e-8; weights are renormalized
            assert!(
                (cfg.raw_mass() - 1.0).abs() < 1e-6,
                "{el:?} {}",
                cfg.raw_mass()
            );
            let fine = PoincareConfig::new(el, cfg.bump, 400, 64, 4).unwrap();
            assert!(
                (fine.raw_mass() - 1.0).abs() < 1e-10,
                "{el:?} {}",
                fine.raw_mass()
            );
            assert!((cfg.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            let m = cfg.barycenter();
            assert!(
                (m[0] - cfg.bump.center[0]).abs() < 1e-14
                    && (m[1] - cfg.bump.center[1]).abs() < 1e-14
            );
        }
        assert!(SmoothingBump::new(Element::Square, [0.5, 0.5], 0.5).is_err());
        assert!(SmoothingBump::new(Element::Square, [0.1, 0.5], 0.2).is_err());
    }

    #[test]
    fn r_of_one_is_half_offset() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            let one = FnScalar {
                f: |_x: [f64; 2]| 1.0,
                singularity: None,
                degree: Some(0),
            };
            let c = cfg.bump.center;
            for x in points(el, 20, 3) {
                let r = apply_r(&one, x, &cfg);
                assert!(
                    (r[0] - 0.5 * (x[0] - c[0])).abs() < 1e-9
                        && (r[1] - 0.5 * (x[1] - c[1])).abs() < 1e-9
                );
            }
            let zero = FnScalar {
                f: |_x: [f64; 2]| 0.0,
                singularity: None,
                degree: Some(0),
            };
            assert_eq!(apply_r(&zero, [0.3, 0.2], &cfg), [0.0, 0.0]);
        }
    }

    #[test]
    fn r_is_a_right_inverse_of_div_pointwise() {
        // psi = x1^2 x2, divergence by centred differences
        let cfg = PoincareConfig::default_for(Element::Square);
        let psi = FnScalar {
            f: |x: [f64; 2]| x[0] * x[0] * x[1],
            singularity: None,
            degree: Some(3),
        };
        let h = 1e-5;
        for x in points(Element::Square, 20, 4) {
            let d = (apply_r(&psi, [x[0] + h, x[1]], &cfg)[0]
                - apply_r(&psi, [x[0] - h, x[1]], &cfg)[0]
                + apply_r(&psi, [x[0], x[1] + h], &cfg)[1]
                - apply_r(&psi, [x[0], x[1] - h], &cfg)[1])
                / (2.0 * h);
            assert!((d - psi.value(x)).abs() < 1e-8, "{x:?} {d}");
        }
    }

    #[test]
    fn r_poly_lands_in_rt_and_inverts_div() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            for p in 0..=4 {
                let ops = PoincarePoly::new(&cfg, p).unwrap();
                assert!(
                    ops.r_residual < MEMBERSHIP_TOL,
                    "{el:?} {p} {}",
                    ops.r_residual
                );
                let psi = poly_random(el, p, 10 + p as u64);
                let v = ops.r_of(&psi).unwrap();
                let d = v.divergence();
                let dd = (&d.coeffs - &psi.raised(p).coeffs).norm();
                assert!(dd < 1e-9 * psi.coeffs.norm(), "{el:?} {p} {dd}");
                // R maps into RT_{p+1}: projection onto the RT basis is exact
                let rt = rt_basis(el, p + 1);
                let back = &rt * (rt.transpose() * &v.coeffs);
                assert!((back - &v.coeffs).norm() < 1e-12 * v.coeffs.norm());
            }
        }
    }

    #[test]
    fn r_poly_of_one_and_mean_zero_flux() {
        let el = Element::Square;
        let cfg = PoincareConfig::default_for(el);
        let one = ScalarPoly::constant(el, 1.0);
        let v = r_poly(&one, &cfg).unwrap();
        assert!((&v.divergence().coeffs - &one.coeffs).norm() < 1e-12);
        let mut psi = poly_random(el, 2, 5);
        psi.coeffs[0] = 0.0;
        let v = r_poly(&psi, &cfg).unwrap();
        let (t, w) = gauss_legendre(6);
        let total: f64 = el
            .edges()
            .iter()
            .map(|e| {
                t.iter()
                    .zip(&w)
                    .map(|(s, ws)| ws * e.length * v.normal_trace(e, s * e.length))
                    .sum::<f64>()
            })
            .sum();
        assert!(total.abs() < 1e-9, "{total}");
    }

    #[test]
    fn a_poly_inverts_curl_on_divergence_free_fields() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            for p in 1..=4 {
                let ops = PoincarePoly::new(&cfg, p).unwrap();
                assert!(
                    ops.a_residual < MEMBERSHIP_TOL,
                    "{el:?} {p} {}",
                    ops.a_residual
                );
                // curl of a random P_{p+1}... restricted to RT_p: curl P_p lies in RT_p
                let g = poly_random(el, p, 40 + p as u64);
                let curl = curl_matrix(el, p, &diff_matrices(el, p));
                let u = RtPoly {
                    element: el,
                    order: p,
                    coeffs: curl * &g.coeffs,
                };
                let a = ops.a_of(&u).unwrap();
                let cu = curl_matrix(el, p, &diff_matrices(el, p)) * &a.coeffs;
                assert!(
                    (cu - &u.coeffs).norm() < 1e-9 * u.coeffs.norm(),
                    "{el:?} {p}"
                );
            }
        }
    }

    #[test]
    fn a_pointwise_matches_curl_inverse() {
        let cfg = PoincareConfig::default_for(Element::Triangle);
        let u = CurlOf(Arc::new(crate::fields::ScalarSmooth));
        let dec = Decomposition::new(&u, &cfg);
        for x in points(Element::Triangle, 20, 6) {
            let c = dec.curl_psi(x, 1e-5);
            let want = u.value(x);
            assert!(
                (c[0] - want[0]).abs() < 1e-8 && (c[1] - want[1]).abs() < 1e-8,
                "{x:?}"
            );
            assert!(dec.v(x)[0].abs() < 1e-14);
        }
        assert_eq!(
            apply_a(&RtPoly::zero(Element::Triangle, 1), [0.3, 0.2], &cfg),
            0.0
        );
    }

    #[test]
    fn decomposition_reconstructs() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            let u = rt_random(el, 3, 8);
            let dec = Decomposition::new(&u, &cfg);
            for x in points(el, 10, 7) {
                let v = dec.v(x);
                let c = dec.curl_psi(x, 1e-5);
                let want = u.value(x);
                let scale = 1.0 + want[0].abs() + want[1].abs();
                assert!((c[0] + v[0] - want[0]).abs() < 1e-7 * scale, "{el:?} {x:?}");
                assert!((c[1] + v[1] - want[1]).abs() < 1e-7 * scale);
            }
        }
        // u = x: div u = 2, v = x - c
        let el = Element::Square;
        let cfg = PoincareConfig::default_for(el);
        struct Id;
        impl VectorField for Id {
            fn value(&self, x: [f64; 2]) -> [f64; 2] {
                x
            }
            fn div(&self, _x: [f64; 2]) -> f64 {
                2.0
            }
        }
        let dec = Decomposition::new(&Id, &cfg);
        let v = dec.v([0.2, 0.9]);
        assert!((v[0] - (0.2 - 0.5)).abs() < 1e-12 && (v[1] - (0.9 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn right_inverse_lands_in_bubbles() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            for p in 2..=5 {
                let mut psi = poly_random(el, p - 1, 30 + p as u64);
                psi.coeffs[0] = 0.0;
                let t = right_inverse_div(&psi, p, &cfg).unwrap();
                let d = t.divergence();
                assert!(
                    (&d.coeffs - &psi.raised(p - 1).coeffs).norm() < 1e-9 * psi.coeffs.norm(),
                    "{el:?} {p}"
                );
                let (s, w) = gauss_legendre(p + 2);
                for e in el.edges() {
                    let l2: f64 = s
                        .iter()
                        .zip(&w)
                        .map(|(s, w)| w * e.length * t.normal_trace(&e, s * e.length).powi(2))
                        .sum();
                    assert!(
                        l2.sqrt() < 1e-9,
                        "{el:?} {p} edge {} {}",
                        e.index,
                        l2.sqrt()
                    );
                }
            }
            let zero = ScalarPoly::zero(el, 2);
            let t = right_inverse_div(&zero, 3, &cfg).unwrap();
            assert!(t.coeffs.norm() < 1e-15);
            assert!(matches!(
                right_inverse_div(&ScalarPoly::constant(el, 1.0), 3, &cfg),
                Err(Error::NonZeroMean { .. })
            ));
        }
    }

    #[test]
    fn r_and_a_invert_div_and_curl_on_random_polynomials() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            for p in 1..=5 {
                let ops = PoincarePoly::new(&cfg, p).unwrap();
                let d = diff_matrices(el, p);
                let curl = curl_matrix(el, p, &d);
                let bub = crate::polyspace::rt_basis(el, p);
                for k in 0..10 {
                    let seed = 100 * p as u64 + k;
                    let psi = poly_random(el, p, seed);
                    let v = ops.r_of(&psi).unwrap();
                    let e = (&v.divergence().coeffs - &psi.coeffs).norm();
                    assert!(e <= 1e-9 * psi.coeffs.norm(), "{el:?} {p} {e}");
                    // divergence-free elements of RT_p are curls of P_p
                    let g = poly_random(el, p, seed + 7);
                    let w = RtPoly {
                        element: el,
                        order: p,
                        coeffs: &curl * &g.coeffs,
                    };
                    assert!(
                        (&bub * (bub.transpose() * &w.coeffs) - &w.coeffs).norm()
                            < 1e-12 * w.coeffs.norm()
                    );
                    let back = &curl * ops.a_of(&w).unwrap().coeffs;
                    let e = (back - &w.coeffs).norm();
                    assert!(e <= 1e-9 * w.coeffs.norm(), "{el:?} {p} {e}");
                }
            }
        }
    }

    #[test]
    fn a_poly_of_random_rt2() {
        let el = Element::Square;
        let cfg = PoincareConfig::default_for(el);
        let u = rt_random(el, 2, 11);
        let a = a_poly(&u, &cfg).unwrap();
        assert_eq!(a.degree, 2);
        let ops = PoincarePoly::new(&cfg, 2).unwrap();
        assert!(ops.a_residual <= 1e-8);
    }

    #[test]
    fn right_inverse_of_first_mode() {
        for el in Element::ALL {
            let cfg = PoincareConfig::default_for(el);
            let mut psi = ScalarPoly::zero(el, 2);
            psi.coeffs[1] = 1.0;
            let t = right_inverse_div(&psi, 3, &cfg).unwrap();
            let e = (&t.divergence().coeffs - &psi.coeffs).norm();
            assert!(e <= 1e-9, "{el:?} {e}");
        }
    }

    #[test]
    fn decomposition_is_bounded_by_divergence() {
        let el = Element::Square;
        let cfg = PoincareConfig::default_for(el);
        let u = rt_random(el, 3, 2);
        let (v, d) = decomposition_norms(&u, &cfg, 10).unwrap();
        assert!(d > 0.0 && v / d < 1.0, "{v} {d}");
        let w = CurlOf(Arc::new(crate::fields::ScalarSmooth));
        let (v, d) = decomposition_norms(&w, &cfg, 10).unwrap();
        assert!(v < 1e-12 && d < 1e-12);
    }
}
