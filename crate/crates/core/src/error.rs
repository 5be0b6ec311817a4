use thiserror::Error;

/// Errors raised by the library. Budget and accuracy failures carry enough
/// context for callers to decide whether to retry with a larger budget.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity error: table built for N <= {capacity}, requested {requested}")]
    Capacity { capacity: usize, requested: usize },

    #[error("retry budget of {attempts} attempts exhausted: {context}")]
    Budget { attempts: u64, context: String },

    #[error("accuracy target missed: estimate {estimate:e} with error bound {bound:e}")]
    Accuracy { estimate: f64, bound: f64 },

    #[error("bound undefined: 2kS^2/N^2 = {ratio} >= 1")]
    BoundUndefined { ratio: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
