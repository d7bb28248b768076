use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("feature spec lists {spec} features but the data has {data}")]
    SpecWidthMismatch { spec: usize, data: usize },

    #[error("raw binary file has {bytes} bytes, not a multiple of {row_bytes} (row of {d} reals)")]
    RawLength {
        bytes: u64,
        row_bytes: usize,
        d: usize,
    },

    #[error("invalid feature spec: {0}")]
    FeatureSpec(String),

    #[error("empty dataset")]
    Empty,

    #[error("metric {metric} is incompatible with feature kinds: {reason}")]
    MetricMismatch { metric: &'static str, reason: String },

    #[error("snapshot index {index} out of range for {n} snapshots")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("feature index {index} out of range for {d} features")]
    FeatureOutOfRange { index: usize, d: usize },

    #[error("point sets differ in size ({0} vs {1}) or are empty")]
    PointSetSize(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spanning tree invalid: {0}")]
    InvalidTree(String),

    #[error("trees span different vertex counts ({0} vs {1})")]
    TreeSizeMismatch(usize, usize),

    #[error("Borůvka merging did not converge within {0} stages")]
    StageCap(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
