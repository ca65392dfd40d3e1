use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing target column {0:?}")]
    MissingTargetColumn(String),
    #[error("single-class target")]
    SingleClassTarget,
    #[error("target column has {0} distinct values, expected 2")]
    NonBinaryTarget(usize),
    #[error("missing target value on data row {0}")]
    MissingTargetValue(usize),
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("class {0} has no rows after split")]
    EmptyClassAfterSplit(u8),
    #[error("unknown selector {0:?}")]
    UnknownSelector(String),
    #[error("no iterations")]
    NoIterations,
    #[error("empty feature pool")]
    EmptyFeaturePool,
    #[error("threshold eliminates all features")]
    ThresholdEliminatesAll,
    #[error("unhoused main effect: {0}")]
    UnhousedMainEffect(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
