//! Command-line front end: run configuration, subcommands and artifact
//! formats for the `ergm` binary.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, Command, RunReport};
pub use config::RunConfig;
pub use error::{CliError, Result};
