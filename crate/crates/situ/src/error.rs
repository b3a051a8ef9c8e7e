use std::path::PathBuf;

use situ_core::balance::BalanceError;
use situ_core::harness::HarnessError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl Error {
    /// Stable tag printed in front of the message.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Io { .. } => "io",
            Error::Json { .. } => "parse",
            Error::Data { .. } => "data",
            Error::Balance(_) => "balance",
            Error::Harness(_) => "harness",
        }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Error::Data {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
