use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("truncated payload in frame {frame}")]
    Truncated { frame: usize },

    #[error("unsupported sample depth: maxval {0} (only 255 is supported)")]
    UnsupportedDepth(u32),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("frame too small: {0}")]
    Size(String),

    #[error("feature kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("row alignment error: {0}")]
    Alignment(String),

    #[error("singular covariance ({0}); use a positive ridge")]
    Singular(String),

    #[error("unknown vocabulary entry: {0:?}")]
    Vocabulary(String),

    #[error("keyframe coverage mismatch: missing {missing:?}, extra {extra:?}")]
    Coverage {
        missing: Vec<(u64, u64)>,
        extra: Vec<(u64, u64)>,
    },

    #[error("duplicate key: {0}")]
    Duplicate(String),

    #[error("training diverged in epoch {epoch} (non-finite values); lower the learning rate")]
    Divergence { epoch: usize },

    #[error("unknown user {0}")]
    MissingUser(u64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }
}
