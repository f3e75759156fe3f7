use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Eigen-decomposition of a complex Hermitian matrix, eigenvalues ascending.
///
/// nalgebra's `SymmetricEigen` returns correct eigenvalues but eigenvectors
/// with residuals up to 1e-3 once the matrix splits into decoupled blocks
/// (chain Hamiltonians do, by symmetry), so this goes through faer.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let a = Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Spectrum(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values = DVector::from_fn(n, |k, _| eig.S()[k].re);
    let u = eig.U();
    Ok((values, DMatrix::from_fn(n, n, |i, j| u[(i, j)])))
}

/// Real symmetric counterpart of [`hermitian_eigen`], eigenvalues ascending.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = Mat::from_fn(n, n, |i, j| m[(i, j)])
        .self_adjoint_eigen(Side::Lower)
        .expect("finite symmetric matrix");
    let u = eig.U();
    (DVector::from_fn(n, |k, _| eig.S()[k]), DMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}
