use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    /// The construct parses but falls outside the decidable matrix class.
    #[error("outside the decidable class: {0}")]
    OutOfClass(String),

    #[error("assignment does not cover set variable #{0}")]
    MissingVariable(usize),

    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },

    #[error("natural number budget exceeded while computing {what} (cap {cap})")]
    Overflow { what: String, cap: u64 },

    /// A resource guard refused to start or continue a computation.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("saturation did not converge after {iterations} repair steps")]
    NonConvergence { iterations: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("index {index} out of bounds (len {len})")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
