use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("line {line}: expected {expected} columns, found {found}")]
    MalformedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("requested feature `{0}` is not present in the input")]
    MissingFeature(String),

    #[error("input file is empty")]
    EmptyFile,

    #[error("zero data rows")]
    NoDataRows,

    #[error("zero numeric columns")]
    NoNumericColumns,

    #[error("feature `{0}` has no non-missing values")]
    AllMissing(String),

    #[error("feature names do not match the fitted pipeline (expected {expected:?}, found {found:?})")]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in input at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("need more points than clusters (n = {n}, c = {c})")]
    TooFewPoints { n: usize, c: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("silhouette undefined: {0}")]
    SilhouetteUndefined(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
