//! Reproducible experiment commands behind the `gibbs-trotter` binary.
//!
//! Each command reads one JSON config, writes CSV/JSON artifacts into an
//! output directory and finishes with `manifest.json`.

pub mod commands;
pub mod output;

use std::fmt;

pub use commands::{
    run_command, Command, LwfConvergenceConfig, QubitsSavedConfig, RunOutcome, TrotterOrderConfig,
};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid config.
    Config(String),
    /// A library stage failed.
    Numeric(gibbs_trotter::Error),
    /// Outputs were written but stage assertions failed.
    Assertion(Vec<String>),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Assertion(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Assertion(_) => "assertion",
            CliError::Io(_) => "io",
        }
    }

    /// `{"error": kind, "message": ..., "exit_code": n}`.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Assertion(failures) = self {
            v["failures"] = serde_json::json!(failures);
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Assertion(v) => write!(f, "{} stage assertion(s) failed", v.len()),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<gibbs_trotter::Error> for CliError {
    fn from(e: gibbs_trotter::Error) -> Self {
        CliError::Numeric(e)
    }
}
