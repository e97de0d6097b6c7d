//! SVD-backed helpers shared by the predictor and the QP solver.
//!
//! nalgebra computes thin SVDs, so a wide matrix is padded with zero rows
//! before factorization; this makes the right-singular basis complete and
//! gives access to the full nullspace.

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::scalar::{real, Scalar};

/// Outcome of a minimum-norm least-squares solve.
pub(crate) struct MinNormSolution<T: Scalar> {
    pub x: DVector<T>,
    /// `‖Ax − b‖₂` on the original (unpadded) system.
    pub residual: T,
}

/// Relative rank cutoff used by the solver paths: `max(m, n) · ε`.
pub(crate) fn machine_rank_tol<T: Scalar>(rows: usize, cols: usize) -> T {
    real::<T>(rows.max(cols) as f64) * Float::epsilon()
}

fn padded_svd<T: Scalar>(a: &DMatrix<T>) -> nalgebra::SVD<T, nalgebra::Dyn, nalgebra::Dyn> {
    let (m, n) = a.shape();
    if m >= n {
        a.clone().svd(true, true)
    } else {
        let mut padded = DMatrix::<T>::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(a);
        padded.svd(true, true)
    }
}

/// Minimum-norm solution of `min ‖Ax − b‖₂`, with rank decided by
/// `rel_tol · σ_max` (defaults to [`machine_rank_tol`]).
pub(crate) fn min_norm_lstsq<T: Scalar>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    rel_tol: Option<T>,
) -> MinNormSolution<T> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "rhs length must match row count");
    let svd = padded_svd(a);
    let rel = rel_tol.unwrap_or_else(|| machine_rank_tol::<T>(m, n));
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, s| max2(acc, *s));
    let cutoff = rel * sigma_max;

    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");

    let mut b_padded = DVector::<T>::zeros(u.nrows());
    b_padded.rows_mut(0, m).copy_from(b);

    // x = V Σ⁺ Uᵀ b with thresholded inverse singular values.
    let mut coeffs = DVector::<T>::zeros(svd.singular_values.len());
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff && *s > T::zero() {
            let proj = u.column(i).dot(&b_padded);
            coeffs[i] = proj / *s;
        }
    }
    let x = v_t.transpose() * coeffs;
    let residual = (a * &x - b).norm();
    MinNormSolution { x, residual }
}

/// Orthonormal basis of the nullspace of `A` (an `n × (n − rank)` matrix)
/// together with the numerical rank.
pub(crate) fn nullspace_basis<T: Scalar>(
    a: &DMatrix<T>,
    rel_tol: Option<T>,
) -> (DMatrix<T>, usize) {
    let (m, n) = a.shape();
    let svd = padded_svd(a);
    let rel = rel_tol.unwrap_or_else(|| machine_rank_tol::<T>(m, n));
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, s| max2(acc, *s));
    let cutoff = rel * sigma_max;
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > cutoff && **s > T::zero())
        .count();
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    // Rows rank.. of Vᵀ span the nullspace.
    let basis = v_t.rows(rank, n - rank).transpose();
    (basis, rank)
}

/// Rank from singular values with a relative threshold `rel_tol · σ_max`.
pub(crate) fn svd_rank<T: Scalar>(a: &DMatrix<T>, rel_tol: T) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let sigma_max = sv.iter().fold(T::zero(), |acc, s| max2(acc, *s));
    if sigma_max == T::zero() {
        return 0;
    }
    let cutoff = rel_tol * sigma_max;
    sv.iter().filter(|s| **s > cutoff).count()
}

/// `RealField` and `Float` both define `max`; a plain comparison avoids the
/// ambiguity.
#[inline]
fn max2<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_underdetermined() {
        // x1 + x2 = 2 has min-norm solution (1, 1).
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_column_slice(&[2.0]);
        let sol = min_norm_lstsq(&a, &b, None);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let (z, rank) = nullspace_basis(&a, None);
        assert_eq!(rank, 1);
        assert_eq!(z.shape(), (3, 2));
        // A Z = 0 and ZᵀZ = I.
        assert!((&a * &z).norm() < 1e-12);
        let gram = z.transpose() * &z;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn rank_of_outer_product() {
        let u = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let v = DVector::from_column_slice(&[4.0, 5.0]);
        let a = &u * v.transpose();
        assert_eq!(svd_rank(&a, 1e-12), 1);
    }
}
