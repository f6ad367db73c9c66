use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch, left is {}x{}, right is {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid dimensions {rows}x{cols} with {len} values")]
    InvalidDimensions { rows: usize, cols: usize, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{what} has a negative entry {value} at ({row}, {col})")]
    NegativeEntry {
        what: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("normal equations AᵀA + λI are singular (lambda = {lambda})")]
    SingularSystem { lambda: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("lambda diverged to {lambda:e} at iteration {iteration}")]
    LambdaDiverged { iteration: usize, lambda: f64 },

    #[error("non-finite {field} at iteration {iteration}")]
    NonFiniteIterate { iteration: usize, field: String },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
