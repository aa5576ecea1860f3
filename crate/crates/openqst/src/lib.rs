//! Configuration, file formats and the command-line driver for open
//! spin-chain state-transfer experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod presets;
pub mod record;

pub use commands::{cmd_optimize, cmd_run, cmd_simulate, cmd_sweep};
pub use config::{Axis, ExperimentConfig};
pub use error::{CliError, Result};
pub use record::{ReportRecord, RunKind, RunRecord};
