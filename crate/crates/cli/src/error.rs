use ca_backtrack_core::backtrack::BacktrackError;
use ca_backtrack_core::eca::EcaError;
use ca_backtrack_core::numtheory::NumTheoryError;
use ca_backtrack_core::statevec::StateError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Resource(_) => exit::RESOURCE,
            CliError::Io { .. } => exit::VERIFICATION_FAILED,
        }
    }
}

impl From<EcaError> for CliError {
    fn from(e: EcaError) -> Self {
        match e {
            EcaError::EnumerationTooLarge { .. } => CliError::Resource(format!(
                "{e}; use the `backtrack` subcommand for wider lines"
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::TooManyQubits { .. } => CliError::Resource(e.to_string()),
            StateError::NumTheory(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<NumTheoryError> for CliError {
    fn from(e: NumTheoryError) -> Self {
        match e {
            NumTheoryError::ModulusTooLarge { .. } => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<BacktrackError> for CliError {
    fn from(e: BacktrackError) -> Self {
        match e {
            BacktrackError::Eca(inner) => inner.into(),
            BacktrackError::State(inner) => inner.into(),
            BacktrackError::NumTheory(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}
