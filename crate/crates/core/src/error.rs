use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty class map")]
    EmptyClassMap,

    #[error("class map line {line}: {reason}")]
    ClassMap { line: usize, reason: String },

    #[error("label line {line}: {reason}")]
    Label { line: usize, reason: String },

    #[error("prediction line {line}: {reason}")]
    Prediction { line: usize, reason: String },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown class id {0}")]
    UnknownClass(u32),

    #[error("duplicate class id {0}")]
    DuplicateClass(u32),

    #[error("prediction references unknown image '{0}'")]
    UnknownImage(String),

    #[error("predictions without ground truth: recall and AP are undefined")]
    NoGroundTruth,

    #[error("ground truth is empty")]
    EmptyGroundTruth,

    #[error("prediction set is empty")]
    NoPredictions,

    #[error("unknown placeholder '{{{0}}}' in command template")]
    UnknownPlaceholder(String),

    #[error("malformed command template: {0}")]
    Template(String),

    #[error("class map mismatch: {0}")]
    ClassMapMismatch(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
