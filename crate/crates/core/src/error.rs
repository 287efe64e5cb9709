use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("dimension mismatch: expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("argument of zero is undefined")]
    UndefinedArgument,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("relative gap undefined for non-positive relaxed cost {0}")]
    UndefinedGap(f64),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidSize(_)
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::NodeOutOfRange { .. }
            | Error::Disconnected
            | Error::UnsupportedTopology(_) => "topology",
            Error::DimensionMismatch { .. } | Error::InvalidInput(_) | Error::UndefinedArgument => {
                "invalid-input"
            }
            Error::UndefinedGap(_) | Error::Singular(_) => "numeric",
            Error::Format(_) | Error::Json(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
