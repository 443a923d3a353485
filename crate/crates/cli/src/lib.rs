//! Command-line front end: config ingestion with explicit units, figure
//! presets, sweep execution, and stable CSV/JSON emission.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] omcascade::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 config, 3 unstable dynamics, 4 numerical/io.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(omcascade::Error::UnstableDynamics { .. }) => 3,
            CliError::Core(omcascade::Error::InvalidParameter { .. }) => 2,
            CliError::Core(omcascade::Error::UnknownParameter(_)) => 2,
            CliError::Core(_) => 4,
            CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
