//! Experiment runner for the ternary consensus simulator.
//!
//! Reads a TOML experiment description, runs the protocol (or the real-valued
//! Metropolis baseline) and writes CSV for external plotting.

use std::io;

use ternary_consensus::Error;
use thiserror::Error as ThisError;

mod commands;
pub mod config;
mod output;
pub mod presets;

pub use commands::{cmd_bound, cmd_check_core, cmd_run, cmd_sweep, BoundArgs, RunReport, SweepRow};
pub use config::{ExperimentConfig, Overrides};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_INVARIANT: u8 = 2;
pub const EXIT_NOT_CORE_CONNECTED: u8 = 3;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("{0}")]
    Engine(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant { .. } => CliError::Invariant(e.to_string()),
            Error::Config(msg) => CliError::Config(msg),
            other => CliError::Engine(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_CONFIG,
        }
    }
}
