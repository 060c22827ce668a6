//! Predictor-accelerated multi-objective search over integer-encoded
//! architecture spaces.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the
//! algorithmic pieces: search spaces and genotypes, objective evaluators and
//! the deduplicating measurement store, lightweight regressors, NSGA-II and
//! random search, the iterative predictor-in-the-loop search, and
//! Pareto/hypervolume analytics. File formats and the command line live in
//! the `linas-moo` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod linas;
pub mod metrics;
pub mod moea;
pub mod objective;
pub mod predictor;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use linas::{run_linas, select_best_unique, LinasConfig, LinasEvent, LinasOutcome};
pub use metrics::{hv_trace, hypervolume_2d, normalized_hypervolume, pareto_front, HypervolumeTrace};
pub use moea::{run_nsga2, run_random, EaConfig, Individual, Population};
pub use objective::{
    normalize_latency, Direction, EvaluationStore, Evaluator, Insert, Measurement, MissingPolicy,
    ObjectiveSpec, SyntheticLandscape, TabularEvaluator,
};
pub use predictor::{Predictor, PredictorKind};
pub use space::{BuiltinSpace, DependencyRule, DesignVariable, Genotype, SearchSpace, SubnetworkConfig};
