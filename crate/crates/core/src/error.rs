use thiserror::Error;

/// Errors raised by the networks, encoders, data utilities and file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GwrError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("network needs at least 2 neurons, has {0}")]
    TooFewNeurons(usize),

    #[error("network is not initialized")]
    Uninitialized,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sequence too short: need at least {needed} frames, got {actual}")]
    SequenceTooShort { needed: usize, actual: usize },

    #[error("operation requires a recursive (single output step) network")]
    VectorMode,

    #[error("degenerate skeleton: {0}")]
    DegenerateSkeleton(&'static str),

    #[error("infeasible dropout: {0}")]
    InfeasibleDropout(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GwrError {
    fn from(e: std::io::Error) -> Self {
        GwrError::Io(e.to_string())
    }
}

pub type Result<T, E = GwrError> = std::result::Result<T, E>;
