//! Command implementations behind the `airy-graph` binary. Each command
//! returns an [`Outcome`] instead of exiting so it can be driven from tests.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 negative
//! classification or failed validation, 3 solver failure.
//!
//! `AIRY_GRAPH_THREADS` is reserved for a future parallel backend and is
//! currently ignored; every command runs on one thread.

pub mod classify;
pub mod config;
pub mod export;
pub mod simulate;
pub mod validate;

use std::path::Path;

use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Negative(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Negative(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

/// Text for stdout plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> Result<(config::RunConfig, Vec<u8>), CliError> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = config::RunConfig::parse(text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((cfg, bytes))
}

/// Pretty JSON with a trailing newline; object keys are sorted, so output
/// bytes depend only on the values.
pub fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}
