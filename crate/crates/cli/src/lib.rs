//! Configuration, orchestration and reporting for the semiflow laboratory.
//!
//! Every command reads one flat TOML file and writes CSV and JSON artifacts
//! plus `manifest.json` into the output directory. Each artifact carries the
//! SHA-256 hash of the configuration.

pub mod artifacts;
pub mod catalog;
pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{run_command, Command, RunError, RunOutcome, Summary};
