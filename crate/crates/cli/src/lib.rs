//! Library side of the `matfact` command-line tool: dataset and experiment
//! file formats plus the subcommand implementations. The binary in
//! `main.rs` is a thin argument-parsing wrapper.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, Result};
