//! Thin adapters between `ndarray` storage and the `faer` eigensolvers.

use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mat = Mat::<Complex64>::from_fn(n, n, |i, j| a[[i, j]]);
    mat.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenSolver { fingerprint: 0, dim: n })
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mat = Mat::<f64>::from_fn(n, n, |i, j| a[[i, j]]);
    mat.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenSolver { fingerprint: 0, dim: n })
}

/// Largest entry modulus of `a - a^dag`.
pub fn hermiticity_defect(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &Array2<Complex64>) -> Complex64 {
    a.diag().sum()
}
