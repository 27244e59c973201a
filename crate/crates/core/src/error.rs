use thiserror::Error;

/// Errors surfaced by the numerical engine.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid model parameters: {0}")]
    ParameterDomain(String),
    #[error("argument outside the exponential-moment strip: {0}")]
    StripViolation(String),
    #[error("Laplace abscissa too small: {0}")]
    AbscissaViolation(String),
    #[error("quadrature truncation failed: {0}")]
    TruncationFailure(String),
    #[error("contour integral did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("law of the supremum has atoms, formula not applicable: {0}")]
    UnsupportedPathType(String),
    #[error("degenerate contract: {0}")]
    DegenerateContract(String),
    #[error("empty Monte Carlo sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, EngineError>;
