//! Configuration, experiment dispatch and output for the `slipwave` binary.

pub mod config;
pub mod emit;
pub mod run;
pub mod verify;

pub use config::{load, ConfigError, ExperimentKind, RunConfig};
pub use run::{execute, run, Status};
