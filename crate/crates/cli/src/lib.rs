//! Library side of the `stia` binary: configuration and the four commands.

pub mod commands;
pub mod config;

pub use commands::{run, Outcome, CSV_SCHEMA_VERSION};
pub use config::{Command, Format, RunConfig, UsageError};
