use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed polygon {index}: {reason}")]
    MalformedPolygon { index: usize, reason: String },
    #[error("obstacle {index} lies outside the map bounds")]
    ObstacleOutOfBounds { index: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("rrt: goal unreachable after {iterations} iterations")]
    Unreachable { iterations: usize },
    #[error("sampling budget of {attempts} attempts exhausted")]
    SamplingExhausted { attempts: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
