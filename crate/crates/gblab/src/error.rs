use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no convergence: {what} (last estimate {last}, achieved error {achieved:e})")]
    NoConvergence {
        what: String,
        last: String,
        achieved: f64,
    },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("ill-conditioned system: residual {0:e}")]
    IllConditioned(f64),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
