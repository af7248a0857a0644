use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("class {label}: requested {requested} samples, only {available} available")]
    InsufficientSamples {
        label: String,
        requested: usize,
        available: usize,
    },

    #[error("label {0} is not one of the model's class labels")]
    UnknownLabel(String),

    #[error("bisection did not converge in {iterations} iterations (bracket gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("gradient descent diverged at epoch {epoch}: loss {loss:e} exceeds 1e6 x initial loss {initial:e}")]
    Diverged {
        epoch: usize,
        loss: f64,
        initial: f64,
    },

    #[error("outlier removal would discard all {0} samples (every deviation is within tolerance of the maximum)")]
    DegenerateRemoval(usize),

    #[error("linear feasibility solver: {0}")]
    Solver(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
