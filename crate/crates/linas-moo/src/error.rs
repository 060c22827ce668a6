use std::path::PathBuf;

use thiserror::Error;

/// Failures of the front-end, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] linas_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Evaluation(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e.root() {
                linas_core::Error::Exhausted(_) => 4,
                _ if matches!(e, linas_core::Error::Evaluation { .. }) => 3,
                _ => 2,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
