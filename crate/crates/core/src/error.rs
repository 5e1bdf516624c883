use thiserror::Error;

use crate::pnm::PnmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error(transparent)]
    Pnm(#[from] PnmError),

    #[error("weight file: {0}")]
    Weights(String),

    #[error("map file: {0}")]
    MapFormat(String),

    #[error("strength map is not binary: pixel {index} has value {value}")]
    NonBinaryMap { index: usize, value: f64 },

    #[error("strength map is zero everywhere")]
    ZeroStrengthMap,

    #[error("relative total strength {target} unreachable; achievable range is [{min}, {max}]")]
    KappaUnreachable { target: f64, min: f64, max: f64 },

    #[error("relative total strength {target} falls between the achievable values {below} and {above}")]
    KappaGap { target: f64, below: f64, above: f64 },

    #[error(
        "entropy mask is empty: no pixel exceeds the threshold {threshold} bits \
         (maximum local entropy {max_entropy:.4} bits); lower the threshold"
    )]
    EmptyEntropyMask { threshold: f64, max_entropy: f64 },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("duplicate response for session {session} trial {trial}")]
    DuplicateRecord { session: String, trial: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
