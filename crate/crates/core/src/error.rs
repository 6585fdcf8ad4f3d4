use thiserror::Error;

/// Errors raised by the solvers and evaluators in this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The argument is valid mathematically but outside the supported range.
    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    /// Quadrature (or another approximation) failed to reach the requested accuracy.
    #[error("accuracy failure in {context}: best estimate {best_estimate:e} with error estimate {error_estimate:e}")]
    Accuracy {
        context: String,
        best_estimate: f64,
        error_estimate: f64,
    },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    /// The certified tail bound could not be brought below the requested tolerance.
    #[error("resolution failure: tail bound {bound:e} exceeds tolerance {tolerance:e} at r_max = {r_max:e}")]
    Resolution { bound: f64, tolerance: f64, r_max: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
