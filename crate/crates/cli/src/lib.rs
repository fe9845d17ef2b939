//! Library side of the `lieocp` command-line tool: configuration loading,
//! the subcommands and their output files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{FileConfig, ModelKind, RunConfig};
pub use run::{execute, Command, Failure, Outcome};
