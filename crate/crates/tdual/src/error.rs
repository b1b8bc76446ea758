use thiserror::Error;

/// Errors raised by the calculus kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalcError {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("not a monomial map: {0}")]
    NotMonomial(String),
    #[error("negative x exponent")]
    NegativeX,
    #[error("function is singular along the stratum")]
    SingularRestriction,
    #[error("not basic along D")]
    NotBasicAlongD,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("degenerate sample point")]
    DegenerateSample,
    #[error("unbound parameter @{0}")]
    UnboundParam(String),
    #[error("form is not closed")]
    NotClosed,
    #[error("form is not invariant: {0}")]
    NotInvariant(String),
    #[error("curvature is not basic")]
    NotBasic,
    #[error("connection check failed: {0}")]
    NotAConnection(String),
    #[error("purity precondition failed: {0}")]
    NotPure(String),
    #[error("exponential needs a form without degree-0 part")]
    ExpOfScalar,
    #[error("residual left-angle dependence after contraction")]
    ResidualAngle,
    #[error("invalid input: {0}")]
    Invalid(String),
}
