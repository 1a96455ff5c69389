use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sentence")]
    EmptySentence,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("every pair was filtered out (max_len = {max_len})")]
    AllFiltered { max_len: usize },
    #[error("no token reaches min_count = {min_count}")]
    NoTokenQualifies { min_count: usize },
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("split produced an empty {0} partition")]
    EmptyPartition(&'static str),
    #[error("dataset needs both classes, found only {0}")]
    SingleClass(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("misaligned inputs: {left} vs {right} lines")]
    Misaligned { left: usize, right: usize },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("row {row}: {msg}")]
    InvalidRating { row: usize, msg: String },
    #[error("unknown metric `{name}` (valid: {valid})")]
    UnknownMetric { name: String, valid: String },
    #[error("phrase table is empty")]
    EmptyPhraseTable,
    #[error("{0} already exists; pass --force to overwrite")]
    WouldOverwrite(PathBuf),
    #[error("{0}")]
    Missing(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, msg: msg.into() }
    }
}
