use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch between {pair}: {left} vs {right}")]
    DimensionMismatch {
        pair: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate empty cluster {cluster}: membership weights sum to zero")]
    EmptyCluster { cluster: usize },

    #[error(
        "root solve did not converge after {iterations} iterations \
         (z = {z}, residual = {residual:e}, bracket = [{lo}, {hi}])"
    )]
    RootNotConverged {
        iterations: usize,
        z: f64,
        residual: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unknown table code {0:?} (expected T1..T16)")]
    UnknownTable(String),

    #[error("malformed result file: {0}")]
    MalformedResult(String),

    #[error("all {0} restarts failed; last error: {1}")]
    AllRestartsFailed(usize, String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
