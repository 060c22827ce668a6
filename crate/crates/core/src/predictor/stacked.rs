use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::ridge::{fit_ridge, RidgeModel};
use super::svr::{fit_svr_rbf, SvrParams, SvrRbfModel};
use super::check_matrix;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackedParams {
    pub ridge_alpha: f64,
    pub svr: SvrParams,
    pub folds: usize,
    /// Seeds the fold shuffle.
    pub seed: u64,
}

impl Default for StackedParams {
    fn default() -> Self {
        Self { ridge_alpha: 1.0, svr: SvrParams::default(), folds: 5, seed: 0 }
    }
}

/// Ridge and RBF-SVR base models feeding a ridge meta-model.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedModel {
    pub ridge: RidgeModel,
    pub svr: SvrRbfModel,
    pub meta: RidgeModel,
    /// Fold of every training point.
    pub fold_of: Vec<usize>,
    /// Out-of-fold `[ridge, svr]` predictions the meta-model was fitted on.
    pub meta_features: Vec<[f64; 2]>,
}

impl StackedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.meta.predict(&[self.ridge.predict(x), self.svr.predict(x)])
    }
}

/// Fits both bases on all data for inference and the meta ridge on
/// out-of-fold base predictions. Folds are assigned round-robin after a
/// seeded shuffle.
pub fn fit_stacked(x: &[Vec<f64>], y: &[f64], params: &StackedParams) -> Result<StackedModel> {
    let k = params.folds;
    if k < 2 {
        return Err(Error::Parameter(alloc::format!("stacking needs at least 2 folds, got {k}")));
    }
    check_matrix(x, y, k)?;
    let n = x.len();
    let largest_fold = n.div_ceil(k);
    if n - largest_fold < 2 {
        return Err(Error::InsufficientData { needed: largest_fold + 2, available: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(params.seed, "stack-folds", 0));
    let mut fold_of = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        fold_of[i] = p % k;
    }

    let mut meta_features = vec![[0.0; 2]; n];
    for fold in 0..k {
        let (train, held): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] != fold);
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let ridge = fit_ridge(&tx, &ty, params.ridge_alpha)?;
        let svr = fit_svr_rbf(&tx, &ty, &params.svr)?;
        for i in held {
            meta_features[i] = [ridge.predict(&x[i]), svr.predict(&x[i])];
        }
    }
    let meta_x: Vec<Vec<f64>> = meta_features.iter().map(|m| m.to_vec()).collect();
    let meta = fit_ridge(&meta_x, y, params.ridge_alpha)?;

    Ok(StackedModel {
        ridge: fit_ridge(x, y, params.ridge_alpha)?,
        svr: fit_svr_rbf(x, y, &params.svr)?,
        meta,
        fold_of,
        meta_features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_folds_on_four_points_are_out_of_fold() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, (i * i) as f64 / 9.0]).collect();
        let y = [1.0, 2.5, 2.0, 4.0];
        let params = StackedParams { folds: 2, seed: 11, ..Default::default() };
        let m = fit_stacked(&x, &y, &params).unwrap();
        for f in 0..2 {
            assert_eq!(m.fold_of.iter().filter(|&&g| g == f).count(), 2);
        }
        for i in 0..4 {
            let train: Vec<usize> = (0..4).filter(|&j| m.fold_of[j] != m.fold_of[i]).collect();
            assert!(!train.contains(&i));
            let tx: Vec<Vec<f64>> = train.iter().map(|&j| x[j].clone()).collect();
            let ty: Vec<f64> = train.iter().map(|&j| y[j]).collect();
            let ridge = fit_ridge(&tx, &ty, params.ridge_alpha).unwrap();
            let svr = fit_svr_rbf(&tx, &ty, &params.svr).unwrap();
            assert_eq!(m.meta_features[i], [ridge.predict(&x[i]), svr.predict(&x[i])]);
        }
    }

    #[test]
    fn seeded_fit_is_deterministic() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 7) as f64 / 6.0, (i % 3) as f64 / 2.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.0 + r[0] - 0.5 * r[1] * r[0]).collect();
        let a = fit_stacked(&x, &y, &StackedParams::default()).unwrap();
        let b = fit_stacked(&x, &y, &StackedParams::default()).unwrap();
        assert_eq!(a.meta.weights, b.meta.weights);
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_samples() {
        let x = [vec![0.0], vec![1.0]];
        assert!(fit_stacked(&x, &[0.0, 1.0], &StackedParams::default()).is_err());
        assert!(fit_stacked(&x, &[0.0, 1.0], &StackedParams { folds: 2, ..Default::default() }).is_err());
    }
}
