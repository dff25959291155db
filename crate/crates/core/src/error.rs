use thiserror::Error;

/// Errors produced by the library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation degree {0} is invalid (need at least {1})")]
    InvalidDegree(u32, u32),

    #[error("multi-index ({0}, {1}) exceeds truncation degree {2}")]
    IndexAboveTruncation(u32, u32, u32),

    #[error("non-finite coefficient at ({0}, {1})")]
    NonFinite(u32, u32),

    #[error("map has a nonzero constant term")]
    NonzeroConstantTerm,

    #[error("linear part is not diagonal and invertible")]
    NotDiagonalInvertible,

    #[error("shear has a singular diagonal entry")]
    SingularShear,

    #[error("field is not normalized (need H(0) = 0 and dH(0) = -id)")]
    NotNormalized,

    #[error("point lies outside the open unit ball (norm {0})")]
    OutsideBall(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular Jacobian at z = {0}")]
    SingularJacobian(String),

    #[error("integration failed at t = {t}: step size {h:e} underflowed")]
    StepUnderflow { t: f64, h: f64 },

    #[error("quadrature did not converge on [{0}, {1}]")]
    QuadratureDiverged(f64, f64),

    #[error("ODE and quadrature disagree: |difference| = {0:e}")]
    Inconsistent(f64),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
