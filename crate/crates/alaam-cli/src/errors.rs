//! Process-level error classification. Every failure surfaces as one line
//! on standard error plus an exit code:
//!
//! - `1` — usage errors: missing or malformed invocation (bad flags,
//!   required settings absent after merging `--config`);
//! - `2` — data errors: unreadable or malformed input files, inconsistent
//!   dimensions, unbindable models;
//! - `3` — non-convergence: the inputs were fine but estimation did not
//!   produce a converged result.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    NonConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NonConverged(_) => 3,
        }
    }

    /// Data error from any displayable cause, prefixed with the file or
    /// subject it concerns.
    pub fn data(subject: impl fmt::Display, cause: impl fmt::Display) -> CliError {
        CliError::Data(format!("{subject}: {cause}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::NonConverged(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl std::error::Error for CliError {}
