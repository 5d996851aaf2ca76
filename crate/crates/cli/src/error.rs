use std::path::PathBuf;

use thiserror::Error;

/// Exit codes are part of the command-line contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const NO_CONVERGENCE: u8 = 2;
    pub const CONDITION_FAILED: u8 = 3;
    pub const CHECK_FAILED: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solution does not match the problem file: {0}")]
    Mismatch(String),

    #[error("bad data in {path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] psifrac::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(psifrac::Error::NoConvergence { .. })
            | CliError::Core(psifrac::Error::NonFiniteIterate { .. }) => exit::NO_CONVERGENCE,
            _ => exit::CONFIG,
        }
    }
}
