use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VdbError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),

    #[error("constraint infeasible: {0}")]
    Infeasible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("row {row}, column {column}: {message}")]
    Trace {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("no samples")]
    NoSamples,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for VdbError {
    fn from(err: std::io::Error) -> Self {
        VdbError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VdbError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(VdbError::Parameter(msg.into()))
}
