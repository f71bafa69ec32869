use std::path::Path;

use artcloud_core::experiment::ExperimentError;
use artcloud_core::features::FeatureError;
use artcloud_core::simulator::SimError;
use artcloud_core::workload::WorkloadError;
use artcloud_core::Art2Error;

/// Command failure, bucketed by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed input document.
    #[error("{0}")]
    Parse(String),
    /// Well-formed input that violates a precondition.
    #[error("{0}")]
    Validation(String),
    /// I/O or a failure during the computation itself.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {err}", path.display()))
    }

    pub fn parse_in(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Parse(format!("{}: {err}", path.display()))
    }
}

impl From<Art2Error> for CliError {
    fn from(e: Art2Error) -> Self {
        match e {
            Art2Error::NotConverged { .. } | Art2Error::CapacityExhausted { .. } => CliError::Runtime(e.to_string()),
            Art2Error::InvalidSnapshot(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::InvalidRequest { .. } | SimError::Unsorted { .. } => {
                CliError::Validation(e.to_string())
            }
            SimError::Art2(inner) => inner.into(),
            SimError::TimeRegression { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<WorkloadError> for CliError {
    fn from(e: WorkloadError) -> Self {
        match e {
            WorkloadError::InvalidSpec(_) => CliError::Validation(e.to_string()),
            WorkloadError::Document { .. } | WorkloadError::Csv(_) => CliError::Parse(e.to_string()),
            WorkloadError::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Parse { .. } => CliError::Parse(e.to_string()),
            FeatureError::Validation { .. } | FeatureError::OutOfRange { .. } | FeatureError::BadWindow(_) => {
                CliError::Validation(e.to_string())
            }
            FeatureError::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Workload { source: WorkloadError::InvalidSpec(_), .. } | ExperimentError::Empty(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
