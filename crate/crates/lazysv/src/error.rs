use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] lazysv_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    /// 1 for invalid input or IO, 2 for a failed verification, 3 for an
    /// exceeded budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 2,
            CliError::Core(e) if e.is_budget() => 3,
            _ => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
