use std::io;
use std::path::{Path, PathBuf};

use ergm_core::ErgmError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] ErgmError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {msg}")]
    Artifact { path: PathBuf, msg: String },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn artifact(path: &Path, msg: impl ToString) -> Self {
        CliError::Artifact { path: path.to_path_buf(), msg: msg.to_string() }
    }
}
