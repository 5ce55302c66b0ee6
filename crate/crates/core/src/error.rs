use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unstable queue: utilization {rho} must be below 1")]
    Unstable { rho: f64 },

    #[error("not available analytically: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid c-state table: {0}")]
    Table(String),

    #[error("scope mismatch: expected {expected}, found {found}")]
    Scope { expected: String, found: String },

    #[error("invalid residency report: {0}")]
    Report(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
