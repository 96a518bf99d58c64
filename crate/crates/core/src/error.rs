use thiserror::Error;

/// Errors produced by the simulator, the network engine and the trainer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("operation `{op}` is not supported for platform {platform}")]
    UnsupportedPlatform { op: &'static str, platform: String },

    #[error("invalid fault mask: {0}")]
    InvalidMask(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parameter randomization produced invalid parameters after {0} attempts")]
    Randomization(usize),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Failure modes when reading a checkpoint file. Each is reported distinctly.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("checkpoint checksum mismatch (file truncated or modified)")]
    Checksum,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
