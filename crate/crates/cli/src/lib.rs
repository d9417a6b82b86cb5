//! Config-driven experiment runner for weighted directed percolation.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use runner::{describe, resolve, run_experiment, RunOptions, RunOutcome, RunStatus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    /// Unparseable config; the message carries line and column.
    #[error("config: {0}")]
    Config(String),
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{0}")]
    Run(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Field { field: field.to_string(), message: message.into() }
    }

    /// Usage, config and runtime failures all exit with 1.
    pub fn exit_code(&self) -> u8 {
        1
    }
}
