//! Hierarchical L2-orthonormal modal bases of P_p(K).
//!
//! T uses the Dubiner basis written in Cartesian form (no collapse
//! singularity); Q uses tensor Legendre polynomials ordered by max degree.
//! In both cases P_{p-1}(K) is a prefix of P_p(K).

use super::legendre::{jacobi_a0, legendre01};
use crate::math::{sqrt, SQRT3};
use crate::refelem::Element;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

pub fn scalar_dim(element: Element, p: usize) -> usize {
    match element {
        Element::Triangle => (p + 1) * (p + 2) / 2,
        Element::Square => (p + 1) * (p + 1),
    }
}

/// Position of the (i, j) mode. On T, i + j is the total degree; on Q,
/// (i, j) are the Legendre degrees in x1 and x2.
pub fn mode_index(element: Element, i: usize, j: usize) -> usize {
    match element {
        Element::Triangle => {
            let d = i + j;
            d * (d + 1) / 2 + j
        }
        Element::Square => {
            let d = i.max(j);
            if i == d {
                d * d + j
            } else {
                d * d + d + 1 + i
            }
        }
    }
}

/// Inverse of [`mode_index`].
pub fn mode_of(element: Element, idx: usize) -> (usize, usize) {
    match element {
        Element::Triangle => {
            let mut d = 0;
            while (d + 1) * (d + 2) / 2 <= idx {
                d += 1;
            }
            let j = idx - d * (d + 1) / 2;
            (d - j, j)
        }
        Element::Square => {
            let mut d = 0;
            while (d + 1) * (d + 1) <= idx {
                d += 1;
            }
            let r = idx - d * d;
            if r <= d {
                (d, r)
            } else {
                (r - d - 1, d)
            }
        }
    }
}

/// Values (and optionally gradients) of all modes at a point.
struct Tab {
    v: Vec<f64>,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

fn tab_square(p: usize, x: [f64; 2]) -> Tab {
    let (a, da) = legendre01(p, x[0]);
    let (b, db) = legendre01(p, x[1]);
    let n = scalar_dim(Element::Square, p);
    let mut t = Tab {
        v: vec![0.0; n],
        dx: vec![0.0; n],
        dy: vec![0.0; n],
    };
    for i in 0..=p {
        for j in 0..=p {
            let k = mode_index(Element::Square, i, j);
            t.v[k] = a[i] * b[j];
            t.dx[k] = da[i] * b[j];
            t.dy[k] = a[i] * db[j];
        }
    }
    t
}

/// Dubiner modes on the reference triangle with vertices (-1,-1), (1,-1), (-1,1),
/// pulled back to the equilateral triangle.
fn tab_triangle(p: usize, x: [f64; 2]) -> Tab {
    // affine map: r = 2 l1 - 1, s = 2 l2 - 1
    let r = 2.0 * x[0] - 2.0 * x[1] / SQRT3 - 1.0;
    let s = 4.0 * x[1] / SQRT3 - 1.0;
    // F_i = P_i(a) ((1-s)/2)^i as a polynomial in (r, s)
    let mut f = vec![0.0; p + 1];
    let mut fr = vec![0.0; p + 1];
    let mut fs = vec![0.0; p + 1];
    f[0] = 1.0;
    let a = 0.5 * (2.0 * r + 1.0 + s);
    let b = 0.25 * (1.0 - s) * (1.0 - s);
    let bs = -0.5 * (1.0 - s);
    if p >= 1 {
        f[1] = a;
        fr[1] = 1.0;
        fs[1] = 0.5;
    }
    for i in 1..p {
        let c1 = (2.0 * i as f64 + 1.0) / (i as f64 + 1.0);
        let c2 = i as f64 / (i as f64 + 1.0);
        f[i + 1] = c1 * a * f[i] - c2 * b * f[i - 1];
        fr[i + 1] = c1 * (f[i] + a * fr[i]) - c2 * b * fr[i - 1];
        fs[i + 1] = c1 * (0.5 * f[i] + a * fs[i]) - c2 * (bs * f[i - 1] + b * fs[i - 1]);
    }
    let n = scalar_dim(Element::Triangle, p);
    let mut t = Tab {
        v: vec![0.0; n],
        dx: vec![0.0; n],
        dy: vec![0.0; n],
    };
    let area = SQRT3 / 4.0;
    for i in 0..=p {
        let (g, gs) = jacobi_a0(2.0 * i as f64 + 1.0, p - i, s);
        for j in 0..=(p - i) {
            // reference norm^2 = 2 / ((2i+1)(i+j+1)); area scale |T|/2
            let nrm2 = area / ((2.0 * i as f64 + 1.0) * (i + j + 1) as f64);
            let c = 1.0 / sqrt(nrm2);
            let k = mode_index(Element::Triangle, i, j);
            let dr = fr[i] * g[j];
            let ds = fs[i] * g[j] + f[i] * gs[j];
            t.v[k] = c * f[i] * g[j];
            t.dx[k] = c * 2.0 * dr;
            t.dy[k] = c * (-2.0 / SQRT3 * dr + 4.0 / SQRT3 * ds);
        }
    }
    t
}

fn tab(element: Element, p: usize, x: [f64; 2]) -> Tab {
    match element {
        Element::Triangle => tab_triangle(p, x),
        Element::Square => tab_square(p, x),
    }
}

/// Mode values at a single point.
pub fn eval_modes(element: Element, p: usize, x: [f64; 2]) -> Vec<f64> {
    tab(element, p, x).v
}

/// Mode values and gradients at a single point.
pub fn eval_modes_grad(element: Element, p: usize, x: [f64; 2]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t = tab(element, p, x);
    (t.v, t.dx, t.dy)
}

/// `points x modes` value matrix.
pub fn tabulate(element: Element, p: usize, points: &[[f64; 2]]) -> DMatrix<f64> {
    let n = scalar_dim(element, p);
    let mut m = DMatrix::zeros(points.len(), n);
    for (row, x) in points.iter().enumerate() {
        let t = tab(element, p, *x);
        for k in 0..n {
            m[(row, k)] = t.v[k];
        }
    }
    m
}

/// `points x modes` matrices of values, x1- and x2-derivatives.
pub fn tabulate_grad(element: Element, p: usize, points: &[[f64; 2]]) -> [DMatrix<f64>; 3] {
    let n = scalar_dim(element, p);
    let mut v = DMatrix::zeros(points.len(), n);
    let mut dx = DMatrix::zeros(points.len(), n);
    let mut dy = DMatrix::zeros(points.len(), n);
    for (row, x) in points.iter().enumerate() {
        let t = tab(element, p, *x);
        for k in 0..n {
            v[(row, k)] = t.v[k];
            dx[(row, k)] = t.dx[k];
            dy[(row, k)] = t.dy[k];
        }
    }
    [v, dx, dy]
}
