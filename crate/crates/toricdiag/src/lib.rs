//! Experiment orchestration around `toricdiag-core`: TOML configs, a rayon
//! chain runner, result files, the verification suites and the subcommands
//! of the `toricdiag` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;
pub mod verify;

pub use commands::run_experiment;
pub use config::{Command, ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
