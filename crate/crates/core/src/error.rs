use thiserror::Error;

/// Errors raised by the library. Validation problems and size/resource
/// problems are kept apart so front ends can map them to distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },
    #[error("level-0 coefficient must be {expected} (got {got})")]
    LevelZero { expected: &'static str, got: String },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("partition is not ordered with respect to its poset")]
    NotOrdered,
    #[error("partition is not a refinement of the other")]
    NotRefinement,
    #[error("ground set of size {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("requested depth {requested} exceeds available depth {available}")]
    DepthShortfall { requested: usize, available: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by problem size rather than malformed input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::InsufficientSamples { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
