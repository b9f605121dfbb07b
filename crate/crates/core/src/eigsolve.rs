//! Shared symmetric eigendecomposition with a deterministic ordering and sign
//! convention. Used by the public `spectral` module and internally wherever a
//! raw matrix has to be decomposed before a `CouplingMatrix` exists.

use nalgebra::{DMatrix, DVector};

/// Iteration cap handed to the tridiagonal QL solver. Reported back in
/// `ConvergenceFailure` errors.
pub(crate) const MAX_EIGEN_ITER: usize = 50_000;

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues sorted descending and the matching eigenvector columns,
/// each sign-normalized so that the entry of largest magnitude is positive
/// (ties broken by lowest index). Returns `None` if the iterative solver does
/// not converge within [`MAX_EIGEN_ITER`].
pub(crate) fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eigen = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER)?;

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps a deterministic order for repeated eigenvalues.
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[j]
            .partial_cmp(&eigen.eigenvalues[i])
            .expect("symmetric eigenvalues are finite")
    });

    let values: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eigen.eigenvectors.column(src));
    }
    for k in 0..n {
        normalize_column_sign(&mut vectors, k);
    }
    Some((values, vectors))
}

/// Flip column `k` so its largest-magnitude entry is positive; on magnitude
/// ties the lowest row index wins.
fn normalize_column_sign(vectors: &mut DMatrix<f64>, k: usize) {
    let col = vectors.column(k);
    let mut pivot = 0;
    let mut best = col[0].abs();
    for (i, v) in col.iter().enumerate().skip(1) {
        if v.abs() > best {
            best = v.abs();
            pivot = i;
        }
    }
    if vectors[(pivot, k)] < 0.0 {
        vectors.column_mut(k).neg_mut();
    }
}

/// Largest absolute difference between `m` and its transpose.
pub(crate) fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Exactly symmetric average of `m` and its transpose.
pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub(crate) fn leading_eigenvector(vectors: &DMatrix<f64>) -> DVector<f64> {
    vectors.column(0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_descending_and_fixes_signs() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, -1.0]);
        let (vals, vecs) = symmetric_eigen_sorted(&m).unwrap();
        assert!((vals[0] - (-0.5)).abs() < 1e-12);
        assert!((vals[1] - (-1.5)).abs() < 1e-12);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((vecs[(0, 0)] - s).abs() < 1e-12);
        assert!((vecs[(1, 0)] - s).abs() < 1e-12);
        // tied magnitudes: lowest index positive
        assert!((vecs[(0, 1)] - s).abs() < 1e-12);
        assert!((vecs[(1, 1)] + s).abs() < 1e-12);
    }

    #[test]
    fn symmetry_defect_detects_corruption() {
        let mut m = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        assert_eq!(symmetry_defect(&m), 0.0);
        m[(0, 1)] += 1e-3;
        assert!((symmetry_defect(&m) - 1e-3).abs() < 1e-15);
    }
}
