//! Configuration, orchestration and file output for the `pentamol` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{run, ResultBundle, Subcommand};
