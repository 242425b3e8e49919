//! Experiment runner for the `ergodic` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;

use thiserror::Error;

pub use config::{parse_config, ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("config error: {0}")]
    MissingKey(String),
    #[error(transparent)]
    Core(#[from] ergodic_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        use ergodic_core::Error as E;
        match self {
            CliError::Config(_) | CliError::MissingKey(_) | CliError::Usage(_) => 2,
            CliError::Core(E::Numeric(_) | E::Tolerance { .. }) => 3,
            CliError::Core(E::Resource(_)) => 4,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
