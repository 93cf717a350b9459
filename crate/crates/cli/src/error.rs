use std::io;
use std::path::PathBuf;

use kruskal_cmc::Error as CoreError;
use thiserror::Error;

/// Process exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// A verification suite ran and at least one check failed.
pub const EXIT_VERIFY_FAILED: u8 = 1;
/// Bad flags, configuration, parameters, or input files.
pub const EXIT_INVALID: u8 = 2;
/// A valid request that the numerics could not complete, or a write error.
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("leaf c = {c} failed: {source}; partial manifest at {manifest}")]
    Partial {
        c: f64,
        source: CoreError,
        manifest: PathBuf,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Read { .. } | CliError::Parse { .. } => EXIT_INVALID,
            CliError::Core(e) | CliError::Partial { source: e, .. } => core_exit_code(e),
            CliError::Write { .. } => EXIT_RUNTIME,
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Domain { .. }
        | CoreError::BeyondSingularity { .. }
        | CoreError::NoSlice { .. }
        | CoreError::InvalidCurve(_)
        | CoreError::Config(_)
        | CoreError::OutOfRange { .. } => EXIT_INVALID,
        CoreError::NotSpacelike { .. }
        | CoreError::Bracket { .. }
        | CoreError::Accuracy { .. }
        | CoreError::StepUnderflow { .. }
        | CoreError::Locate(_) => EXIT_RUNTIME,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
