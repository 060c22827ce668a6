//! File formats, experiment orchestration and command implementations
//! behind the `linas-moo` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;

pub use config::{ExperimentConfig, LoadedConfig};
pub use error::{CliError, Result};
