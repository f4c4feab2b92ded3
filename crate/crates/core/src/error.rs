use thiserror::Error;

/// Errors produced by system construction, integrators and measurements.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} has {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix {matrix} is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { matrix: &'static str, asymmetry: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("system validation failed: {0}")]
    InvalidSystem(String),

    #[error("unsupported BDF order {0} (expected 1..=5)")]
    UnsupportedOrder(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration failed at step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("error norm undefined: {0}")]
    UndefinedNorm(&'static str),

    #[error("invalid problem parameters: {0}")]
    InvalidProblem(String),

    #[error("reference cross-validation failed: difference {difference:e} exceeds {threshold:e}")]
    ReferenceMismatch { difference: f64, threshold: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
