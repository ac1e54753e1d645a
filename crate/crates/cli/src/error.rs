use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dcf_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status: 2 bad input, 3 solver failure, 4 unsupported PHY, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use dcf_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Core(E::InvalidScenario(_) | E::Domain(_)) => 2,
            CliError::Core(E::Divergence { .. } | E::Numerical(_) | E::Degenerate(_) | E::RetryDivergence) => 3,
            CliError::Core(E::Unsupported(_)) => 4,
            CliError::Core(E::NoCrossing { .. }) | CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
