use crate::expr::{EvalError, ParseError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("chart mismatch: [{0}] vs [{1}]")]
    ChartMismatch(String, String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("form literal mixes degrees {0} and {1}")]
    InhomogeneousDegree(usize, usize),
    #[error("coordinate `{0}` has no parametrization")]
    MissingParametrization(String),
    #[error("constraint `{0}` is not satisfied by the parametrization")]
    ConstraintViolated(String),
    #[error("not supported: {0}")]
    Unsupported(String),
    #[error("division by zero in {0}")]
    DivisionByZero(String),
    #[error("form is not closed on the pseudostructure; residual: {}", .residual.join(", "))]
    NotClosedOnPseudostructure { residual: Vec<String> },
    #[error("no closed-form potential: {0}")]
    NoPotential(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
