use thiserror::Error;

pub type Result<T, E = StudyError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("trial {index} out of range; the session has {count} trials")]
    TrialOutOfRange { index: usize, count: usize },

    #[error("trial {index} has already been answered")]
    AlreadyAnswered { index: usize },

    #[error("trial {index} is not the current trial {current}; trials must be taken in order")]
    OutOfOrder { index: usize, current: usize },

    #[error("unknown image")]
    UnknownImage,

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error(transparent)]
    Stats(#[from] ebim::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
