use crate::lie::Group;

/// Errors raised by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("group mismatch: expected {expected}, found {found}")]
    GroupMismatch { expected: Group, found: Group },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("spatial metric lost positive-definiteness at t = {t} (min eigenvalue {min_eigenvalue:.3e})")]
    SingularMetric { t: f64, min_eigenvalue: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("constraint violated in initial data: {name} = {value:.3e} (tolerance {tolerance:.1e})")]
    ConstraintViolation {
        name: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::SingularMetric { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
