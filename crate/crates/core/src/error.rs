use thiserror::Error;

/// Errors raised across the library.
///
/// Variants fall into two families: validation/precondition failures (bad
/// input, unsupported model) and numerical failures (non-convergence,
/// singular systems). [`LevyError::is_numerical`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid too small: need at least {need} nodes, got {got}")]
    GridTooSmall { need: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("kernel is not integrable at zero (singularity exponent {exponent})")]
    NonIntegrableKernel { exponent: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("quadrature did not converge: estimate {estimate}, residual {residual}")]
    Quadrature { estimate: f64, residual: f64 },
    #[error("singular or ill-conditioned system (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

impl LevyError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, LevyError::Quadrature { .. } | LevyError::Singular { .. })
    }
}

pub type Result<T> = std::result::Result<T, LevyError>;
