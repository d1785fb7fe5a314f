//! Thin wrappers over nalgebra factorizations with the error reporting the
//! solvers need.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Result, VgError};

/// Pivot ratio above which an LU factor is treated as singular.
const MAX_PIVOT_RATIO: f64 = 1e15;

/// Solves `a x = rhs` by LU with partial pivoting.
///
/// The ratio of largest to smallest pivot is used as a cheap condition
/// estimate and reported when the system is numerically singular.
pub fn lu_solve(a: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for d in u.diagonal().iter() {
        lo = lo.min(d.abs());
        hi = hi.max(d.abs());
    }
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < MAX_PIVOT_RATIO) {
        return Err(VgError::Singular { condition });
    }
    lu.solve(rhs).ok_or(VgError::Singular { condition })
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub fn cholesky(a: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let n = a.nrows();
    Cholesky::new(a).ok_or_else(|| VgError::NotPositiveDefinite(format!("{n}×{n} system")))
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse logistic, `log(x / (1 - x))`.
pub fn logit(x: f64) -> f64 {
    x.ln() - (-x).ln_1p()
}

/// Binary entropy term `m log m + (1 - m) log(1 - m)` (non-positive).
pub fn neg_entropy(m: f64) -> f64 {
    m * m.ln() + (1.0 - m) * (-m).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_logit_inverse() {
        for &x in &[-40.0, -5.0, 0.0, 0.3, 12.0] {
            let s = sigmoid(x);
            assert!((logit(s) - x).abs() < 1e-9 * (1.0 + x.abs()), "{x}");
        }
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn singular_lu_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = lu_solve(a, &DVector::from_column_slice(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, VgError::Singular { .. }));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(a).is_err());
    }
}
