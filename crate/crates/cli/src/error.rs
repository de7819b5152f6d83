use std::path::PathBuf;

use cfweave::FrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0} (set strategy.allow_fallback = true to fall back to descent search)")]
    Budget(FrameError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Every error is an input problem: exit code 2.
    pub fn exit_code(&self) -> i32 {
        2
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::BudgetExceeded { .. } => Self::Budget(e),
            other => Self::Input(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
