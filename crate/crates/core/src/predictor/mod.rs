//! Lightweight objective predictors.
//!
//! Genotypes are featurized ordinally: an active variable at option index
//! `i` of `k` maps to `i / (k - 1)`, masked and single-option variables map
//! to 0. Three regressors sit on top: ridge, epsilon-SVR with an RBF kernel,
//! and a stack of the two feeding a ridge meta-model.

mod analysis;
mod linalg;
mod ridge;
mod stacked;
mod stats;
mod svr;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use analysis::{analyze_predictors, AnalysisConfig, PredictorReport, ReportRow};
pub use ridge::{fit_ridge, RidgeModel};
pub use stacked::{fit_stacked, StackedModel, StackedParams};
pub use stats::{kendall_tau, mape};
pub use svr::{fit_svr_rbf, SvrParams, SvrRbfModel};

use crate::error::{Error, Result};
use crate::space::{Genotype, SearchSpace};

/// Ordinal features of `g`; canonical-equal genotypes featurize identically.
pub fn featurize(space: &SearchSpace, g: &Genotype) -> Result<Vec<f64>> {
    let mask = space.active_mask(g)?;
    Ok(space
        .variables()
        .iter()
        .zip(g.indices())
        .zip(mask)
        .map(|((v, &idx), active)| if active && v.arity() > 1 { idx as f64 / (v.arity() - 1) as f64 } else { 0.0 })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    Ridge,
    SvrRbf,
    Stacked,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [PredictorKind::Ridge, PredictorKind::SvrRbf, PredictorKind::Stacked];

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Ridge => "ridge",
            PredictorKind::SvrRbf => "svr_rbf",
            PredictorKind::Stacked => "stacked",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" => Ok(PredictorKind::Ridge),
            "svr" | "svr_rbf" | "svr-rbf" => Ok(PredictorKind::SvrRbf),
            "stacked" => Ok(PredictorKind::Stacked),
            other => Err(Error::Parameter(format!("unknown predictor kind `{other}`"))),
        }
    }
}

/// Hyper-parameters shared by every predictor kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorParams {
    pub ridge_alpha: f64,
    pub svr: SvrParams,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PredictorParams {
    fn default() -> Self {
        Self { ridge_alpha: 1.0, svr: SvrParams::default(), folds: 5, seed: 0 }
    }
}

/// A fitted model of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Ridge(RidgeModel),
    SvrRbf(SvrRbfModel),
    Stacked(StackedModel),
}

impl Predictor {
    pub fn fit(kind: PredictorKind, x: &[Vec<f64>], y: &[f64], params: &PredictorParams) -> Result<Self> {
        Ok(match kind {
            PredictorKind::Ridge => Predictor::Ridge(fit_ridge(x, y, params.ridge_alpha)?),
            PredictorKind::SvrRbf => Predictor::SvrRbf(fit_svr_rbf(x, y, &params.svr)?),
            PredictorKind::Stacked => Predictor::Stacked(fit_stacked(
                x,
                y,
                &StackedParams { ridge_alpha: params.ridge_alpha, svr: params.svr, folds: params.folds, seed: params.seed },
            )?),
        })
    }

    pub fn kind(&self) -> PredictorKind {
        match self {
            Predictor::Ridge(_) => PredictorKind::Ridge,
            Predictor::SvrRbf(_) => PredictorKind::SvrRbf,
            Predictor::Stacked(_) => PredictorKind::Stacked,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Predictor::Ridge(m) => m.predict(x),
            Predictor::SvrRbf(m) => m.predict(x),
            Predictor::Stacked(m) => m.predict(x),
        }
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Checks a design matrix for a consistent, non-zero row width.
pub(crate) fn check_matrix(x: &[Vec<f64>], y: &[f64], min_rows: usize) -> Result<usize> {
    if x.len() < min_rows {
        return Err(Error::InsufficientData { needed: min_rows, available: x.len() });
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let d = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: row.len() });
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite training value".into()));
    }
    Ok(d)
}
