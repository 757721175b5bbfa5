use std::path::PathBuf;

use toricdiag_core::Error as CoreError;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A failed assertion or verification check (exit 1).
    #[error("{0}")]
    Assertion(String),
    /// Invalid or unreadable configuration (exit 2).
    #[error("{0}")]
    Config(String),
    /// An engine refused a problem beyond its capacity guard (exit 3).
    #[error("{0}")]
    Capacity(CoreError),
    #[error("{0}")]
    Core(CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Config(_) | CliError::Core(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Io { .. } | CliError::Format(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Capacity { .. } => CliError::Capacity(e),
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
