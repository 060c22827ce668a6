use alloc::vec;
use alloc::vec::Vec;

use super::check_matrix;
use super::linalg::solve;
use crate::error::{Error, Result};

/// `y ≈ w·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
}

impl RidgeModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Ridge regression on centred data: `(XcᵀXc + αI) w = Xcᵀ yc`,
/// `intercept = mean(y) - mean(X)·w`.
///
/// Columns that are constant over the sample carry no information after
/// centring; they get weight 0 and are left out of the solve, so an
/// unregularized fit only fails on genuinely collinear columns.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<RidgeModel> {
    let d = check_matrix(x, y, 1)?;
    if !(alpha >= 0.0) {
        return Err(Error::Parameter(alloc::format!("ridge alpha must be >= 0, got {alpha}")));
    }
    let n = x.len() as f64;
    let x_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let y_mean = y.iter().sum::<f64>() / n;

    let live: Vec<usize> = (0..d).filter(|&j| x.iter().any(|r| r[j] != x[0][j])).collect();
    let p = live.len();
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centred = vec![0.0; p];
    for (row, &target) in x.iter().zip(y) {
        for (c, &j) in centred.iter_mut().zip(&live) {
            *c = row[j] - x_mean[j];
        }
        let yc = target - y_mean;
        for a in 0..p {
            rhs[a] += centred[a] * yc;
            for b in a..p {
                gram[a * p + b] += centred[a] * centred[b];
            }
        }
    }
    for a in 0..p {
        gram[a * p + a] += alpha;
        for b in 0..a {
            gram[a * p + b] = gram[b * p + a];
        }
    }

    let mut weights = vec![0.0; d];
    if p > 0 {
        let solved = solve(gram, rhs, p).map_err(|e| match e {
            // Report the defect against the full feature dimension.
            Error::Singular { rank, .. } => Error::Singular { rank, dim: d },
            other => other,
        })?;
        for (&j, w) in live.iter().zip(solved) {
            weights[j] = w;
        }
    }
    let intercept = y_mean - x_mean.iter().zip(&weights).map(|(m, w)| m * w).sum::<f64>();
    Ok(RidgeModel { weights, intercept, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let m = fit_ridge(&[vec![1.0], vec![2.0]], &[2.0, 4.0], 0.0).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_target_and_feature() {
        for alpha in [0.0, 0.5, 10.0] {
            let m = fit_ridge(&[vec![1.0], vec![1.0]], &[1.0, 1.0], alpha).unwrap();
            assert_eq!(m.weights, vec![0.0]);
            assert_eq!(m.intercept, 1.0);
        }
    }

    #[test]
    fn collinear_columns_without_regularization() {
        let x = [vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let err = fit_ridge(&x, &[1.0, 2.0, 3.0], 0.0).unwrap_err();
        assert_eq!(err, Error::Singular { rank: 1, dim: 2 });
        assert!(fit_ridge(&x, &[1.0, 2.0, 3.0], 1e-3).is_ok());
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(fit_ridge(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0], 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(fit_ridge(&[vec![1.0]], &[1.0, 2.0], 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(fit_ridge(&[], &[], 1.0), Err(Error::InsufficientData { .. })));
    }
}
