//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

/// Relative eigenvalue floor below which a symmetric block counts as singular.
pub const PD_RELATIVE_FLOOR: f64 = 1e-12;

/// Symmetric square root and inverse square root of a positive definite matrix.
///
/// Returns `None` when the smallest eigenvalue is not positive relative to the
/// largest (`PD_RELATIVE_FLOOR`).
pub fn sym_sqrt_and_inv_sqrt(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= PD_RELATIVE_FLOOR * max {
        return None;
    }
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt())) * v.transpose();
    let inv_root = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * v.transpose();
    Some((symmetrize(&root), symmetrize(&inv_root)))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Sample covariance `(a - mean_a)^T (b - mean_b) / (n - 1)` of column blocks.
pub fn cross_covariance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let ca = center_columns(a);
    let cb = center_columns(b);
    ca.transpose() * cb / (n as f64 - 1.0)
}

pub fn column_means(a: &DMatrix<f64>) -> nalgebra::DVector<f64> {
    let n = a.nrows() as f64;
    nalgebra::DVector::from_iterator(a.ncols(), a.column_iter().map(|c| c.sum() / n))
}

pub fn center_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    let means = column_means(a);
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    out
}
