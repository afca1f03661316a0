use crate::error::{Error, Result};
use crate::math::{cos, PI};
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

pub const DEFAULT_MAX_QUAD_DEGREE: usize = 200;

static MAX_DEGREE: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUAD_DEGREE);

/// Sets the largest quadrature degree any rule constructor will accept.
pub fn set_max_quad_degree(d: usize) {
    MAX_DEGREE.store(d, Ordering::Relaxed);
}

pub fn max_quad_degree() -> usize {
    MAX_DEGREE.load(Ordering::Relaxed)
}

fn check_degree(degree: usize) -> Result<()> {
    let max = max_quad_degree();
    if degree > max {
        Err(Error::Capability {
            requested: degree,
            max,
        })
    } else {
        Ok(())
    }
}

/// Nodes, positive weights and the polynomial degree integrated exactly.
#[derive(Clone, Debug)]
pub struct QuadRule<const D: usize> {
    pub nodes: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl<const D: usize> QuadRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut([f64; D]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn append(&mut self, other: QuadRule<D>) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self.degree = self.degree.min(other.degree);
    }
}

/// `n`-point Gauss-Legendre rule on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

pub fn interval_rule(degree: usize) -> Result<QuadRule<1>> {
    check_degree(degree)?;
    let (x, w) = gauss_legendre(points_for(degree));
    Ok(QuadRule {
        nodes: x.into_iter().map(|t| [t]).collect(),
        weights: w,
        degree,
    })
}

/// Tensor Gauss rule on (0,1)^2, exact per variable up to `degree`.
pub fn square_rule(degree: usize) -> Result<QuadRule<2>> {
    check_degree(degree)?;
    let (x, w) = gauss_legendre(points_for(degree));
    let mut nodes = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for (xi, wi) in x.iter().zip(&w) {
        for (xj, wj) in x.iter().zip(&w) {
            nodes.push([*xi, *xj]);
            weights.push(wi * wj);
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

/// Collapsed-coordinate rule on an arbitrary triangle, exact for total degree `degree`.
pub fn triangle_rule_on(v: [[f64; 2]; 3], degree: usize) -> Result<QuadRule<2>> {
    check_degree(degree)?;
    let (xu, wu) = gauss_legendre(points_for(degree));
    let (xv, wv) = gauss_legendre(points_for(degree + 1));
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let mut nodes = Vec::with_capacity(xu.len() * xv.len());
    let mut weights = Vec::with_capacity(xu.len() * xv.len());
    for (s, ws) in xv.iter().zip(&wv) {
        for (u, wuu) in xu.iter().zip(&wu) {
            let l1 = u * (1.0 - s);
            let l2 = *s;
            nodes.push([
                v[0][0] + l1 * e1[0] + l2 * e2[0],
                v[0][1] + l1 * e1[1] + l2 * e2[1],
            ]);
            weights.push(wuu * ws * (1.0 - s) * jac);
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

/// Rule on the equilateral reference triangle.
pub fn triangle_rule(degree: usize) -> Result<QuadRule<2>> {
    let v = crate::refelem::Element::Triangle.vertices();
    triangle_rule_on([v[0], v[1], v[2]], degree)
}

fn extrude(base: QuadRule<2>, degree: usize) -> Result<QuadRule<3>> {
    let (z, wz) = gauss_legendre(points_for(degree));
    let mut nodes = Vec::with_capacity(base.len() * z.len());
    let mut weights = Vec::with_capacity(base.len() * z.len());
    for (x, w) in base.nodes.iter().zip(&base.weights) {
        for (zk, wk) in z.iter().zip(&wz) {
            nodes.push([x[0], x[1], *zk]);
            weights.push(w * wk);
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        degree,
    })
}

pub fn prism_rule(degree: usize) -> Result<QuadRule<3>> {
    extrude(triangle_rule(degree)?, degree)
}

pub fn cube_rule(degree: usize) -> Result<QuadRule<3>> {
    extrude(square_rule(degree)?, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{powf, SQRT3};

    #[test]
    fn interval_monomials() {
        let r = interval_rule(9).unwrap();
        assert!((r.integrate(|x| powf(x[0], 9.0)) - 0.1).abs() < 1e-15);
        for k in 0..=9 {
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((r.integrate(|x| powf(x[0], k as f64)) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn triangle_area_and_square_product() {
        let t = triangle_rule(0).unwrap();
        assert!((t.measure() - SQRT3 / 4.0).abs() < 1e-15);
        let q = square_rule(3).unwrap();
        let v = q.integrate(|x| powf(x[0], 3.0) * powf(x[1], 3.0));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomials_against_beta_integrals() {
        // On the unit right triangle, int x^a y^b = a! b! / (a+b+2)!
        let r = triangle_rule_on([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 12).unwrap();
        let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
        for a in 0..=12 {
            for b in 0..=(12 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let got = r.integrate(|x| powf(x[0], a as f64) * powf(x[1], b as f64));
                assert!(((got - exact) / exact).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn capability_cap() {
        assert!(matches!(
            interval_rule(DEFAULT_MAX_QUAD_DEGREE + 1),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn high_order_gauss_is_accurate() {
        let (x, w) = gauss_legendre(150);
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * powf(*x, 200.0)).sum();
        assert!((m - 1.0 / 201.0).abs() < 1e-14);
    }

    #[test]
    fn cylinder_volumes() {
        assert!((prism_rule(2).unwrap().measure() - SQRT3 / 4.0).abs() < 1e-15);
        assert!((cube_rule(2).unwrap().measure() - 1.0).abs() < 1e-15);
    }
}
