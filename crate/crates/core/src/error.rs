use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("uncertainty set is unbounded along coordinate {0}")]
    UnboundedOmega(usize),
    #[error("uncertainty set is empty")]
    EmptyOmega,
    #[error("variable {0} has no finite bounds")]
    UnboundedVariable(usize),
    #[error("missing or infinite beta bounds on coupled row {0}")]
    MissingBetaBounds(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("numerical failure in LP solver: {0}")]
    NumericalFailure(String),
    #[error("first-level feasible set is empty")]
    InfeasibleFirstLevel,
    #[error("parse error in {path} at line {line}, column {column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("unknown device role '{0}'")]
    UnknownRole(String),
    #[error("time series has {found} rows, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("negative multiplier in column {column} at period {period}")]
    NegativeMultiplier { column: String, period: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
