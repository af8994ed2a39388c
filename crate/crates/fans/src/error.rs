use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FansError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fans_core::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl FansError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FansError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        FansError::Parse { path: path.into(), line, message: message.into() }
    }

    /// Process exit code: 2 for bad input or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            FansError::Parse { .. } | FansError::Config(_) => 2,
            FansError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            FansError::Core(fans_core::Error::Argument(_) | fans_core::Error::Config(_)) => 2,
            FansError::Io { .. } | FansError::Core(_) | FansError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, FansError>;
