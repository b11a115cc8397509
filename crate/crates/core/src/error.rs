use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. The CLI maps the variants onto its
/// stable exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("delta = {delta} is not admissible: {reason}")]
    Inadmissible { delta: String, reason: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Argument(_) | Error::Io(_) => 2,
            Error::Inadmissible { .. } => 3,
            Error::Resource(_) => 4,
            Error::Unbounded | Error::Invariant(_) => 5,
        }
    }
}
