use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid block: {0}")]
    InvalidBlock(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("operation requires an ordered (directed) design")]
    NotOrdered,

    #[error("design has no group partition")]
    MissingPartition,

    #[error("development failed: {0}")]
    Develop(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{0} is not a prime power")]
    NotPrimePower(u32),

    #[error("no ingredient registered for signature {0}")]
    MissingIngredient(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("output failed verification:\n{0}")]
    Verification(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("v={v} is not admissible: {reason}")]
    Inadmissible { v: usize, reason: String },

    #[error("{name}: {msg}")]
    Entry { name: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
