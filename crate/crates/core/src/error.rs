use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("invalid input: {0}")]
    Usage(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("solver diverged at t = {time} s: {reason}")]
    SolverDivergence { time: f64, reason: String },

    #[error("solver diverged for configuration {configuration}: {source}")]
    ConfigurationDivergence {
        configuration: String,
        #[source]
        source: Box<Error>,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for divergence of the flow solver, including divergence wrapped
    /// with the configuration that triggered it.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverDivergence { .. } | Error::ConfigurationDivergence { .. }
        )
    }
}
