use std::process::ExitCode;

use thiserror::Error;

/// CLI failure with an exit-code policy: usage/parse problems exit 1,
/// numerical failures exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Numerical(_) => ExitCode::from(2),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

impl From<beamsynth::SolverError> for CliError {
    fn from(e: beamsynth::SolverError) -> Self {
        match e {
            beamsynth::SolverError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<beamsynth::ArrayError> for CliError {
    fn from(e: beamsynth::ArrayError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<beamsynth::ImagingError> for CliError {
    fn from(e: beamsynth::ImagingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<beamsynth::FactorizeError> for CliError {
    fn from(e: beamsynth::FactorizeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<beamsynth::LinalgError> for CliError {
    fn from(e: beamsynth::LinalgError) -> Self {
        CliError::Usage(e.to_string())
    }
}
