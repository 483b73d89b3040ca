use thiserror::Error;

/// Failures raised by the simulation and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("covariance not positive-definite: eigenvalue {eigenvalue:e} at index {index} (largest {largest:e})")]
    NotPositiveDefinite {
        eigenvalue: f64,
        index: usize,
        largest: f64,
    },

    #[error("quadrature did not converge for t={t}, |x|={r}; the seed kernel is not smooth enough")]
    QuadratureFailure { t: f64, r: f64 },

    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("degenerate normalization: total mass {0}")]
    DegenerateNormalization(f64),

    #[error("no bracket found for the root in [{lo:e}, {hi:e}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
