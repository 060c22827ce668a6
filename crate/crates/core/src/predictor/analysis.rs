use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{kendall_tau, mape, Predictor, PredictorKind, PredictorParams};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

/// Repeated train/test protocol for comparing predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub train_sizes: Vec<usize>,
    pub trials: usize,
    pub test_size: usize,
    pub kinds: Vec<PredictorKind>,
    pub params: PredictorParams,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            train_sizes: (1..=10).map(|k| 100 * k).collect(),
            trials: 100,
            test_size: 500,
            kinds: PredictorKind::ALL.to_vec(),
            params: PredictorParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub train_size: usize,
    pub kind: PredictorKind,
    pub mape_mean: f64,
    pub tau_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorReport {
    /// Ordered by train size, then by the configured kind order.
    pub rows: Vec<ReportRow>,
    pub trials: usize,
    pub test_size: usize,
}

impl PredictorReport {
    pub fn get(&self, train_size: usize, kind: PredictorKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.train_size == train_size && r.kind == kind)
    }
}

/// Each trial draws its own test set, reused for every train size, and
/// trains on nested prefixes of the remaining shuffled pool. Reported
/// values are means over trials.
pub fn analyze_predictors(x: &[Vec<f64>], y: &[f64], cfg: &AnalysisConfig) -> Result<PredictorReport> {
    if cfg.train_sizes.is_empty() || cfg.kinds.is_empty() || cfg.trials == 0 || cfg.test_size < 2 {
        return Err(Error::Parameter("analysis needs sizes, kinds, trials >= 1 and test_size >= 2".into()));
    }
    if cfg.train_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("train sizes must be strictly increasing".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let largest = *cfg.train_sizes.last().expect("non-empty");
    let needed = largest + cfg.test_size;
    if x.len() < needed {
        return Err(Error::InsufficientData { needed, available: x.len() });
    }

    let cells = cfg.train_sizes.len() * cfg.kinds.len();
    let mut mape_sum = vec![0.0; cells];
    let mut tau_sum = vec![0.0; cells];
    for trial in 0..cfg.trials {
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.shuffle(&mut stream(cfg.seed, "analysis-trial", trial as u64));
        let (test, pool) = perm.split_at(cfg.test_size);
        let test_x: Vec<Vec<f64>> = test.iter().map(|&i| x[i].clone()).collect();
        let test_y: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        let params = PredictorParams { seed: derive_seed(cfg.seed, "analysis-stack", trial as u64), ..cfg.params };

        for (s, &size) in cfg.train_sizes.iter().enumerate() {
            let train_x: Vec<Vec<f64>> = pool[..size].iter().map(|&i| x[i].clone()).collect();
            let train_y: Vec<f64> = pool[..size].iter().map(|&i| y[i]).collect();
            for (k, &kind) in cfg.kinds.iter().enumerate() {
                let model = Predictor::fit(kind, &train_x, &train_y, &params)?;
                let predicted = model.predict_many(&test_x);
                mape_sum[s * cfg.kinds.len() + k] += mape(&predicted, &test_y)?;
                tau_sum[s * cfg.kinds.len() + k] += kendall_tau(&predicted, &test_y)?;
            }
        }
    }

    let trials = cfg.trials as f64;
    let rows = cfg
        .train_sizes
        .iter()
        .enumerate()
        .flat_map(|(s, &train_size)| {
            let (mape_sum, tau_sum) = (&mape_sum, &tau_sum);
            cfg.kinds.iter().enumerate().map(move |(k, &kind)| ReportRow {
                train_size,
                kind,
                mape_mean: mape_sum[s * cfg.kinds.len() + k] / trials,
                tau_mean: tau_sum[s * cfg.kinds.len() + k] / trials,
            })
        })
        .collect();
    Ok(PredictorReport { rows, trials: cfg.trials, test_size: cfg.test_size })
}
