use std::path::PathBuf;

use thiserror::Error;

use crate::snapshot::SnapshotError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const DIVERGENCE: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// A config value failed parsing or validation; `path` is the key path.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Snapshot(#[from] SnapshotError),

    #[error("{path}: schema mismatch: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("{path}: {detail}")]
    Data { path: PathBuf, detail: String },

    #[error("run diverged at step {step} (t = {time}): {detail}")]
    Divergence { step: usize, time: f64, detail: String },

    #[error(transparent)]
    Core(#[from] ionflow::Error),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => exit::VALIDATION,
            CliError::Divergence { .. } => exit::DIVERGENCE,
            CliError::Core(e) => match e {
                ionflow::Error::Config(_) | ionflow::Error::Domain(_) | ionflow::Error::Usage(_) => {
                    exit::VALIDATION
                }
                ionflow::Error::Divergence { .. } => exit::DIVERGENCE,
                _ => exit::IO,
            },
            CliError::Io { .. } | CliError::Snapshot(_) | CliError::Schema { .. } | CliError::Data { .. } => exit::IO,
        }
    }

    /// Key path for validation errors.
    pub fn key_path(&self) -> Option<&str> {
        match self {
            CliError::Validation { path, .. } => Some(path),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
