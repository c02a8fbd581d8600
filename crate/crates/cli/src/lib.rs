//! Command-line pipeline: concept extraction, activation caching, probing,
//! value regression, NMF, covariance maps, opening distributions, and a
//! self-test gate, all driven by a flat key = value config file.

pub mod commands;
pub mod config;
pub mod selftest;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
}

impl CliError {
    /// Process exit code: 1 usage, 2 data error, 3 invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

pub use commands::{
    cmd_activations, cmd_cov, cmd_extract_concepts, cmd_nmf, cmd_openings, cmd_probe,
    cmd_residuals, cmd_value_reg, two_pass_covariance,
};
pub use config::{load_config, RunConfig};
pub use selftest::run_selftest;
