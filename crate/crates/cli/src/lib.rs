//! Batch front end for the locpv analyses.
//!
//! [`parse_args`] turns an argument vector into a validated [`RunConfig`];
//! [`run_command`] executes it. Failures carry the process exit status:
//! 1 for domain errors, 2 for usage errors, 3 for I/O errors.

mod args;
mod config;
mod run;

use std::fmt;

pub use args::{parse_args, parse_grid, BoostMode, Command, FieldSource, RunConfig};
pub use run::run_command;

/// A failed invocation.
#[derive(Debug)]
pub enum CliError {
    /// `--help` or `--version`; carries the text to print on stdout.
    Help(String),
    Usage(String),
    FileNotFound(String),
    Io(String),
    Domain(locpv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(locpv::Error::Io(_)) => 3,
            CliError::Domain(_) => 1,
            CliError::Help(_) => 0,
            CliError::Usage(_) => 2,
            CliError::FileNotFound(_) | CliError::Io(_) => 3,
        }
    }

    /// Stable error token printed on stderr.
    pub fn token(&self) -> &'static str {
        match self {
            CliError::Help(_) => "Help",
            CliError::Usage(_) => "UsageError",
            CliError::FileNotFound(_) => "FileNotFound",
            CliError::Io(_) => "IoError",
            CliError::Domain(e) => e.token(),
        }
    }
}

impl fmt::Display for CliError {
    /// One line: `error: <Token>: <detail>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = match self {
            CliError::Help(m) | CliError::Usage(m) | CliError::FileNotFound(m) | CliError::Io(m) => m.clone(),
            CliError::Domain(e) => e.to_string(),
        };
        let detail = detail.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
        write!(f, "error: {}: {}", self.token(), detail)
    }
}

impl std::error::Error for CliError {}

impl From<locpv::Error> for CliError {
    fn from(e: locpv::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Sizes the global rayon pool from `LOCPV_THREADS` (unset or 0: automatic).
pub fn init_threads() -> Result<(), CliError> {
    let n = match std::env::var("LOCPV_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("LOCPV_THREADS must be a non-negative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    if n > 0 {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
