use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
