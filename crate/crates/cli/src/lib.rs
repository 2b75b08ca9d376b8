//! Command-line harness around `surprisal-core`: loading a CSV with its
//! schema, fitting residuals, predicting, seeded evaluation, anomaly
//! detection and conviction reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod report;
pub mod split;

pub use commands::{run, Command};
pub use config::{RunConfig, SeedList};
pub use error::{CliError, CliResult};
