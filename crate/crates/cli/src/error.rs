use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigErrors;

/// Exit status for a run whose selected verifications did not all pass.
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// Malformed dataset contents. `row` counts data rows from 1; row 0 is
    /// the header.
    #[error("{}: row {row}, column {column}: {message}", path.as_ref().map_or("<input>".into(), |p| p.display().to_string()))]
    Data {
        path: Option<PathBuf>,
        row: usize,
        column: String,
        message: String,
    },
    #[error("dataset has no {0} split")]
    MissingSplit(String),
    #[error(transparent)]
    Core(#[from] noisereg_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Divergence shares the verification-failure status: the run finished
    /// its checks and the result is negative.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(noisereg_core::Error::Divergence { .. }) => EXIT_VERIFICATION_FAILED,
            _ => EXIT_CONFIG,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
