use std::path::PathBuf;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("timestamps not strictly increasing at line {line}")]
    NonMonotonic { line: u64 },

    #[error("leading missing value at row {index} has no earlier value to fill from")]
    NoFillSource { index: usize },

    #[error("missing value at row {index}; clean the records first")]
    Uncleaned { index: usize },

    #[error("invalid resampling interval: {0}")]
    Interval(String),

    #[error("empty resampling bin starting at {0}")]
    EmptyBin(String),

    #[error("invalid split: {0}")]
    Split(String),

    #[error("degenerate scale: training values are constant ({0})")]
    DegenerateScale(f64),

    #[error("{what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            got,
        }
    }
}
