//! Dense helpers on top of nalgebra.

use crate::error::{Error, Result};
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = 0.5 * (a + a.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Squared cutoffs below this are lost in the rounding of `a^T a`.
const GRAM_FLOOR: f64 = 1e-13;

/// Eigenpairs of `a^T a` and the cutoff `max(rel_tol^2, floor)` times the top eigenvalue.
///
/// nalgebra's SVD can lose accuracy on matrices with clustered singular
/// values, so the rank decisions here go through the symmetric eigensolver.
fn gram_spectrum(a: &DMatrix<f64>, rel_tol: f64) -> (DVector<f64>, DMatrix<f64>, f64) {
    let (vals, vecs) = sym_eigen(&(a.transpose() * a));
    let top = vals.iter().fold(0.0f64, |x, v| x.max(*v));
    (vals, vecs, (rel_tol * rel_tol).max(GRAM_FLOOR) * top)
}

/// Orthonormal basis of the null space of `a`: eigenvectors of `a^T a` whose
/// eigenvalues fall below `rel_tol^2` times the largest.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let (vals, vecs, cut) = gram_spectrum(a, rel_tol);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i] <= cut).collect();
    let z = vecs.select_columns(&cols);
    if z.ncols() == 0 {
        z
    } else {
        orthonormalize(&z)
    }
}

/// Orthonormal basis of the column space of `a`, dropping directions whose
/// singular values are below `rel_tol` times the largest.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let (vals, vecs, cut) = gram_spectrum(a, rel_tol);
    let cols: Vec<usize> = (0..a.ncols())
        .filter(|&i| vals[i] > cut && vals[i] > 0.0)
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let mut q = a * vecs.select_columns(&cols);
    for (k, &i) in cols.iter().enumerate() {
        q.column_mut(k).scale_mut(1.0 / crate::math::sqrt(vals[i]));
    }
    orthonormalize(&q)
}

/// Orthonormal basis of `span(b)` minus its part in `span(c)`, for `span(c)`
/// contained in `span(b)`. Both inputs must have orthonormal columns.
pub fn complement_in(b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let r = b - c * (c.transpose() * b);
    let k = b.ncols().saturating_sub(c.ncols());
    let q = column_space(&r, 1e-8);
    debug_assert_eq!(q.ncols(), k);
    if q.ncols() == 0 {
        return q;
    }
    // once more against c: the rank decision costs a little orthogonality
    orthonormalize(&(&q - c * (c.transpose() * &q)))
}

/// Orthonormalizes the columns of a full-rank matrix (QR applied twice).
pub fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return a.clone();
    }
    let q = a.clone().qr().q();
    q.clone().qr().q()
}

/// Solves a symmetric positive definite system by Cholesky.
pub fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let sym = 0.5 * (a + a.transpose());
    let chol = sym.cholesky().ok_or(Error::SolverFailure {
        residual: f64::INFINITY,
        threshold: 0.0,
    })?;
    Ok(chol.solve(b))
}

pub fn spd_solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = spd_solve(a, &m)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Inverse of an SPD matrix.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_solve(a, &DMatrix::identity(a.nrows(), a.nrows()))
}

/// Generalized symmetric eigenproblem `A x = lambda B x` with `B` SPD,
/// returning ascending eigenvalues and `B`-orthonormal eigenvectors.
pub fn gen_sym_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let sym = 0.5 * (b + b.transpose());
    let chol = sym.cholesky().ok_or(Error::SolverFailure {
        residual: f64::INFINITY,
        threshold: 0.0,
    })?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::SolverFailure {
            residual: f64::INFINITY,
            threshold: 0.0,
        })?;
    let c = &linv * a * linv.transpose();
    let (vals, y) = sym_eigen(&c);
    Ok((vals, linv.transpose() * y))
}

/// Largest absolute entry of `a - a^T`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            m = m.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    m
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_dimensions() {
        let b = DMatrix::<f64>::identity(5, 3);
        let mut c = DMatrix::zeros(5, 1);
        c[(0, 0)] = 0.6;
        c[(1, 0)] = 0.8;
        let w = complement_in(&b, &c);
        assert_eq!(w.ncols(), 2);
        assert!(max_abs(&(c.transpose() * &w)) < 1e-14);
        assert!(max_abs(&(w.transpose() * &w - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let z = null_space(&a, 1e-12);
        assert_eq!(z.ncols(), 2);
        assert!(max_abs(&(&a * &z)) < 1e-14);
        assert!(max_abs(&(z.transpose() * &z - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn generalized_eigen() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let (v, x) = gen_sym_eigen(&a, &b).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
        let xtbx = x.transpose() * &b * &x;
        assert!(max_abs(&(xtbx - DMatrix::identity(2, 2))) < 1e-14);
    }
}
