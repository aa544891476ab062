use thiserror::Error;

/// Errors raised by filters, kernels, the gradient oracle and the benchmark.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("{algorithm} diverged in run {run} at step {step}: |e|^2 = {value}")]
    Diverged {
        algorithm: String,
        run: usize,
        step: usize,
        value: f64,
    },

    #[error("malformed dictionary line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
