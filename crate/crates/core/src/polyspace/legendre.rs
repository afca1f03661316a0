//! One-dimensional Legendre and Jacobi recurrences with derivatives.

use alloc::vec;
use alloc::vec::Vec;

/// Values and derivatives of Legendre polynomials `L_0..=L_n` at `t` in [-1, 1].
pub fn legendre(n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    v[0] = 1.0;
    if n >= 1 {
        v[1] = t;
        d[1] = 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        v[k + 1] = ((2.0 * kf + 1.0) * t * v[k] - kf * v[k - 1]) / (kf + 1.0);
        d[k + 1] = d[k - 1] + (2.0 * kf + 1.0) * v[k];
    }
    (v, d)
}

/// Values and derivatives of Jacobi polynomials `P_0^{(a,0)}..=P_n^{(a,0)}` at `t`.
pub fn jacobi_a0(a: f64, n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    v[0] = 1.0;
    if n >= 1 {
        v[1] = 0.5 * ((a + 2.0) * t + a);
        d[1] = 0.5 * (a + 2.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + a;
        let c0 = 2.0 * kf * (kf + a) * (s - 2.0);
        let c1 = (s - 1.0) * s * (s - 2.0);
        let c2 = (s - 1.0) * a * a;
        let c3 = 2.0 * (kf + a - 1.0) * (kf - 1.0) * s;
        v[k] = ((c1 * t + c2) * v[k - 1] - c3 * v[k - 2]) / c0;
        d[k] = ((c1 * t + c2) * d[k - 1] + c1 * v[k - 1] - c3 * d[k - 2]) / c0;
    }
    (v, d)
}

/// Orthonormal Legendre basis on [0, 1]: `sqrt(2k+1) L_k(2x-1)`, with x-derivatives.
pub fn legendre01(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut v, mut d) = legendre(n, 2.0 * x - 1.0);
    for k in 0..=n {
        let s = libm::sqrt(2.0 * k as f64 + 1.0);
        v[k] *= s;
        d[k] *= 2.0 * s;
    }
    (v, d)
}

/// Integrated-Legendre edge bubbles on [0, 1] for k = 2..=n, scaled so that
/// their derivatives are the orthonormal Legendre polynomials of degree k-1.
pub fn lobatto01(n: usize, x: f64) -> Vec<f64> {
    if n < 2 {
        return Vec::new();
    }
    let (l, _) = legendre(n, 2.0 * x - 1.0);
    (2..=n)
        .map(|k| {
            let kf = k as f64;
            (l[k] - l[k - 2]) / (2.0 * libm::sqrt(2.0 * kf - 1.0))
        })
        .collect()
}
