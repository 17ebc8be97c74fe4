use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge: {what} (error estimate {error:e})")]
    Quadrature { what: String, error: f64 },
    #[error("solver did not converge: {what} after {iterations} iterations (last iterate {last:?}, gradient norm {grad_norm:e})")]
    NonConvergence { what: String, iterations: usize, last: Vec<f64>, grad_norm: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors produced by a numerical solver rather than by invalid input.
    pub fn is_solver(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
