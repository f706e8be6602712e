use thiserror::Error;

#[derive(Debug, Error)]
pub enum PceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("gradient data required but not present")]
    MissingGradients,

    #[error("responses required but not present")]
    MissingResponses,

    #[error("matrix column {0} is identically zero")]
    ZeroColumn(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PceError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PceError {
    PceError::InvalidArgument(msg.into())
}
