//! Batch runner: parses a subcommand, runs it, and writes CSV results plus a metadata
//! sidecar next to each primary output.

pub mod args;
mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches};
use thiserror::Error;

use crate::args::Cli;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for unusable flags, config files or parameters.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical or I/O failures during a run.
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

impl From<echo_rmt::Error> for CliError {
    fn from(e: echo_rmt::Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let command = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let matches = match command.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_CONFIG;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let start = Instant::now();
    match commands::execute(&cli.command).and_then(|report| {
        let definition = Cli::command();
        let echo = definition.find_subcommand(name).map(|c| config::echo(c, sub)).unwrap_or_default();
        output::write_sidecar(&report.primary, name, &echo, &report.metadata, start.elapsed().as_secs_f64())
    }) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
