use thiserror::Error;

/// Crate wide error type. CLI exit codes are derived from the variant:
/// configuration problems exit 2, failed acceptance checks exit 3,
/// everything else exits 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for this error under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::CheckFailed(_) => 3,
            _ => 1,
        }
    }
}
