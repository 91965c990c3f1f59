use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),

    #[error("the zero form is not allowed here")]
    ZeroForm,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("retry budget exhausted in {stage}: {detail}")]
    RetryExhausted { stage: String, detail: String },

    #[error("root finder did not converge: {0}")]
    RootFinding(String),

    #[error("no smooth conic found in the apolar net")]
    NoSmoothConic,

    #[error("split solution space has dimension {found}, expected {expected}")]
    SplitDimension { expected: usize, found: usize },

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn retry(stage: &str, detail: impl Into<String>) -> Self {
        Error::RetryExhausted {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
