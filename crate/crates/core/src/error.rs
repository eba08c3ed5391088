use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} does not fit the {tier} tier")]
    RangeViolation { value: String, tier: String },

    #[error("integer overflow converting {0} to the target representation")]
    TierOverflow(String),

    #[error("numeric precision exhausted: {0}")]
    Exhausted(String),

    #[error("root refinement did not converge after {steps} steps")]
    NoConvergence { steps: usize },

    #[error("shadow matrix entry {0} is not an exact integer")]
    InexactShadow(String),

    #[error("{path}:{line}: {msg}")]
    Input {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("worker failed: {0}")]
    Worker(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
