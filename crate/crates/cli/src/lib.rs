//! Library side of the `surfspin` command: configuration, subcommands and output sealing.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use config::{Prepared, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] surfspin::Error),
    #[error("eigensolver did not converge (max residual {max_residual:e})")]
    NotConverged { files: Vec<PathBuf>, max_residual: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: u8 = 0;
/// A check or oracle comparison ran and reported a failure.
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Numerical(e) if is_validation(e) => EXIT_VALIDATION,
            _ => EXIT_NUMERICAL,
        }
    }
}

fn is_validation(e: &surfspin::Error) -> bool {
    use surfspin::Error::*;
    matches!(
        e,
        UnknownChart(_) | ChartParameter(_) | Expression(_) | Boundary(_) | InvalidGrid(_) | Units(_) | UnsupportedOracle(_)
    )
}
