use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("method not permitted: {0}")]
    Method(String),

    #[error("numeric cancellation: {lost_digits:.1} digits lost in {context}")]
    Cancellation { context: String, lost_digits: f64 },

    #[error("rejection envelope construction failed: {0}")]
    Envelope(String),

    #[error("frequency {l} is not observed in the sample")]
    UnobservedFrequency { l: u64 },

    #[error("infeasible moment sequence: {0}")]
    InfeasibleMoments(String),

    #[error("unsupported prior for {0}")]
    UnsupportedPrior(&'static str),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("integration did not converge: {0}")]
    Quadrature(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("sigma must lie in (0, 1), got {sigma}")))
    }
}
