use hidden_momentum::Error as CoreError;
use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_TOLERANCE_BREACH: i32 = 2;
pub const EXIT_INVALID_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_INVALID_CONFIG,
            CliError::Core(
                CoreError::InvalidQuantumNumbers { .. }
                | CoreError::BeyondCap { .. }
                | CoreError::InvalidCap(_)
                | CoreError::InvalidField(_)
                | CoreError::GuardViolation { .. },
            ) => EXIT_INVALID_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}
