use alloc::string::String;

use crate::space::Genotype;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the search engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("malformed genotype: {0}")]
    MalformedGenotype(String),
    #[error("unknown builtin space `{0}`")]
    UnknownSpace(String),
    #[error("genotype {0} is not canonical")]
    NonCanonical(Genotype),
    #[error("no tabular entry for genotype {0}")]
    UnknownConfig(Genotype),
    /// Tabular miss under the nearest-reject policy; the candidate is skipped.
    #[error("genotype {genotype} rejected (nearest tabulated config: {nearest})")]
    Rejected { genotype: Genotype, nearest: Genotype },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular system: rank {rank} of {dim}")]
    Singular { rank: usize, dim: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("search space exhausted: {0}")]
    Exhausted(String),
    #[error("hypervolume is only supported for 2 objectives, got {0}")]
    UnsupportedDimension(usize),
    #[error("objective {0} has zero range")]
    DegenerateRange(usize),
    #[error("evaluation failed in {context}: {source}")]
    Evaluation {
        context: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    /// Wraps an evaluator failure with the algorithm phase it happened in.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::Evaluation { context: context.into(), source: alloc::boxed::Box::new(self) }
    }

    /// Innermost error, looking through evaluation context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Evaluation { source, .. } => source.root(),
            other => other,
        }
    }
}
