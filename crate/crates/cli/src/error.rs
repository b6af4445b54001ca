use genephen_core::CoreError;
use thiserror::Error;

/// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {err}")]
    Core { stage: String, err: CoreError },
    #[error("{stage}: IoError: {err}")]
    Io { stage: String, err: std::io::Error },
    #[error("{stage}: {message}")]
    Usage { stage: String, message: String },
    #[error("{path}: UnsupportedVersion {found} (supported: {supported})")]
    UnsupportedVersion { path: String, found: u64, supported: u64 },
    #[error("{path}: MalformedModel: {message}")]
    MalformedModel { path: String, message: String },
    #[error("{stage}: malformed input: {message}")]
    Malformed { stage: String, message: String },
}

impl CliError {
    pub fn core(stage: &str, err: CoreError) -> Self {
        CliError::Core { stage: stage.to_string(), err }
    }

    pub fn io(stage: &str, err: std::io::Error) -> Self {
        CliError::Io { stage: stage.to_string(), err }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { err, .. } => match err {
                CoreError::InvalidFraction { .. }
                | CoreError::InvalidHyperparameter { .. }
                | CoreError::InvalidFolds { .. }
                | CoreError::InvalidK { .. }
                | CoreError::ConfigError { .. }
                | CoreError::InvalidArchitecture { .. } => 2,
                CoreError::NonFiniteLoss { .. } => 4,
                _ => 3,
            },
            CliError::Usage { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
