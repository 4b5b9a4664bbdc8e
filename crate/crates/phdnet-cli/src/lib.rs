//! Library surface of the `phdnet` command-line tool.
//!
//! The binary is a thin argument parser over these pieces; integration tests
//! call the command functions directly.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_analyze, cmd_export, cmd_ingest, cmd_regress, cmd_synth, cmd_validate, exit_code,
};
pub use config::{load_config_file, OutputFormat, RawOptions, RunConfig};
