//! Small dense helpers over nalgebra for the d×d systems used by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub(crate) fn cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if !a.iter().all(|x| x.is_finite()) {
        return None;
    }
    Cholesky::new(a.clone())
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let chol = cholesky(a)?;
    let x = chol.solve(&DVector::from_column_slice(b));
    x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
}

/// Square roots of the diagonal of `a^{-1}`.
pub(crate) fn spd_inverse_sqrt_diag(a: &DMatrix<f64>) -> Option<Vec<f64>> {
    let inv = cholesky(a)?.inverse();
    let out: Vec<f64> = (0..inv.nrows()).map(|k| inv[(k, k)].sqrt()).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `log sum exp(x)`, shifted by the maximum.
pub(crate) fn log_sum_exp(x: &[f64]) -> f64 {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let x = spd_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
        let sd = spd_inverse_sqrt_diag(&a).unwrap();
        assert!((sd[0] - (3.0f64 / 11.0).sqrt()).abs() < 1e-12);
        assert!((sd[1] - (4.0f64 / 11.0).sqrt()).abs() < 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(spd_solve(&singular, &[1.0, 0.0]).is_none());
    }

    #[test]
    fn lse_is_stable() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
