use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {what} (estimate {estimate})")]
    Resource { what: String, estimate: u64 },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    /// Propagating labels over Q_d reached two different cover vertices for the
    /// same cube vertex. `cycle` is the offending Q_d edge (tail, head).
    #[error(
        "cube does not lift to the universal cover: inconsistent labels on Q_d edge {cycle:?}"
    )]
    LiftObstruction { cycle: (usize, usize) },

    #[error("dimension {requested} outside assembled range 0..={assembled}")]
    OutOfRange { requested: usize, assembled: usize },

    #[error("cache: {0}")]
    Cache(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
