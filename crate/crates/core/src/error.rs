use thiserror::Error;

use crate::partition::BlockId;

/// Failure reported by a user-supplied entry or operator oracle.
#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct OracleError(pub String);

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle failure at block {block:?}: {source}")]
    Oracle {
        block: Option<BlockId>,
        #[source]
        source: OracleError,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn oracle_at(block: BlockId, source: OracleError) -> Self {
        Error::Oracle {
            block: Some(block),
            source,
        }
    }
}

impl From<OracleError> for Error {
    fn from(source: OracleError) -> Self {
        Error::Oracle {
            block: None,
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
