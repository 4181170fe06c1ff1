use std::path::PathBuf;

use platoon_core::Error as CoreError;

/// Documented process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INVALID: i32 = 3;
    pub const DOMAIN: i32 = 4;
    pub const NUMERIC: i32 = 5;
    pub const MISMATCH: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } => exit::INVALID,
            CliError::Verification(_) => exit::MISMATCH,
            CliError::Core(e) => match e {
                CoreError::InvalidScenario { .. } | CoreError::NonFiniteInput(_) => exit::INVALID,
                CoreError::ChordTooLong { .. }
                | CoreError::Domain(_)
                | CoreError::DegenerateGeometry(_) => exit::DOMAIN,
                CoreError::NonFiniteState { .. }
                | CoreError::NonFiniteJacobian { .. }
                | CoreError::EigenNoConvergence { .. } => exit::NUMERIC,
                CoreError::BetaExtraction(_) => exit::MISMATCH,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
