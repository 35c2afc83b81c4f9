//! Small dense linear-algebra helpers.
//!
//! Setup code works with `nalgebra` matrices; the per-node hot loops work on
//! row-major `Vec<f64>` buffers to stay allocation-free.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    SymmetricEigen::new(symmetrize(m)).eigenvalues
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().copied().fold(f64::INFINITY, f64::min)
}

/// `sup_{|α|=1} Aα·α`, i.e. the top eigenvalue of the symmetric part.
/// Not a norm: it is negative when `A` is negative definite.
pub(crate) fn sup_quadratic(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration, stopped once `|Mv - λv| <= tol`.
pub(crate) fn power_iteration(m: &DMatrix<f64>, tol: f64) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    // Start off-axis so no eigenvector of a diagonal matrix is orthogonal to it.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = m * &v;
        lambda = v.dot(&w);
        let residual = (&w - &v * lambda).norm();
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if residual <= tol {
            break;
        }
    }
    lambda
}

pub(crate) fn to_flat(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n * m.ncols()];
    for i in 0..n {
        for j in 0..m.ncols() {
            out[i * m.ncols() + j] = m[(i, j)];
        }
    }
    out
}

#[inline]
pub(crate) fn matvec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

#[inline]
pub(crate) fn quad_form(a: &[f64], n: usize, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let ri: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
        acc += x[i] * ri;
    }
    acc
}

#[inline]
pub(crate) fn frobenius_sq(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_matches_symmetric_eigen() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let top = sup_quadratic(&m);
        assert!((power_iteration(&m, 1e-12) - top).abs() < 1e-10);
    }

    #[test]
    fn sup_quadratic_is_signed() {
        let m = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, -0.2]);
        assert!((sup_quadratic(&m) + 0.2).abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let r = sqrt_spd(&m);
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14 && (r[(1, 1)] - 3.0).abs() < 1e-14);
    }
}
