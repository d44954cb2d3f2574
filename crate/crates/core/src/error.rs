use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported dataset: {0}")]
    UnsupportedDataset(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("cannot draw labeled split: {0}")]
    Split(String),

    #[error("series lengths differ ({left} vs {right})")]
    IncompatibleLengths { left: usize, right: usize },

    #[error("empty time series")]
    EmptySeries,

    #[error("window length {window} exceeds series length {length}")]
    WindowTooLarge { window: usize, length: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("node {0} is isolated (zero degree)")]
    IsolatedNode(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical failure after {iterations} iterations: {message}")]
    Numerical { iterations: usize, message: String },

    #[error("training failed at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("distance between series {i} and {j} failed: {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
