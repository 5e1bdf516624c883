use std::path::PathBuf;

use ebim::Error;
use ebim_study::StudyError;
use thiserror::Error as ThisError;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MISSING_INPUT: u8 = 3;
pub const EXIT_FORMAT: u8 = 4;
pub const EXIT_INVALID_PARAMETER: u8 = 5;
pub const EXIT_KAPPA_UNREACHABLE: u8 = 6;
pub const EXIT_EMPTY_ENTROPY_MASK: u8 = 7;
pub const EXIT_INSUFFICIENT_DATA: u8 = 8;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error(transparent)]
    Study(#[from] StudyError),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingInput(_) => EXIT_MISSING_INPUT,
            CliError::Io { .. } => EXIT_FAILURE,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Json(_) => EXIT_FORMAT,
            CliError::Core(e) => core_code(e),
            CliError::Study(e) => match e {
                StudyError::InvalidConfig(_) | StudyError::InvalidRequest(_) => EXIT_FORMAT,
                StudyError::Stats(e) => core_code(e),
                _ => EXIT_FAILURE,
            },
        }
    }
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING_INPUT,
        Error::Io(_) => EXIT_FAILURE,
        Error::ShapeMismatch { .. }
        | Error::InvalidImage(_)
        | Error::Pnm(_)
        | Error::Weights(_)
        | Error::MapFormat(_) => EXIT_FORMAT,
        Error::InvalidParameter(_)
        | Error::LabelOutOfRange { .. }
        | Error::NonBinaryMap { .. }
        | Error::ZeroStrengthMap
        | Error::EmptyDataset => EXIT_INVALID_PARAMETER,
        Error::KappaUnreachable { .. } | Error::KappaGap { .. } => EXIT_KAPPA_UNREACHABLE,
        Error::EmptyEntropyMask { .. } => EXIT_EMPTY_ENTROPY_MASK,
        Error::Degenerate(_) | Error::DuplicateRecord { .. } => EXIT_INSUFFICIENT_DATA,
    }
}
