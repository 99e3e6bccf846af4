use thiserror::Error;

/// Error type shared across the simulator, trainer, and CLI.
#[derive(Debug, Error)]
pub enum GncError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("out of envelope: {0}")]
    OutOfEnvelope(String),
    #[error("simulation fault: {0}")]
    Fault(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GncError>;
