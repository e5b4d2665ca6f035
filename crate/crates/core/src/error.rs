use thiserror::Error;

use crate::exact::RMatrix;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("parameters outside the positivity regime: {0}")]
    Regime(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypergeometric series does not terminate: no upper parameter is a non-positive integer")]
    NonTerminating,

    #[error("lower parameter #{index} = {value} produces a zero Pochhammer factor at k = {at}, before termination")]
    PoleInLowerParameter { index: usize, value: String, at: usize },

    #[error("orthogonality fails at (n, m) = ({n}, {m}): residual {residual}")]
    OrthogonalityViolation { n: usize, m: usize, residual: String },

    #[error("relation `{relation}` violated; residual:\n{residual}")]
    RelationViolation { relation: String, residual: Box<RMatrix> },

    #[error("transition matrix is singular")]
    SingularTransition,

    #[error("bandwidth {bandwidth} exceeds {limit}")]
    BandwidthViolation { bandwidth: usize, limit: usize },

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    #[error("Clebsch-Gordan / polynomial mismatch at (n, k) = ({n}, {k}): {detail}")]
    MatchViolation { n: usize, k: usize, detail: String },

    #[error("eigenvalue {0} of the coupled operator is degenerate")]
    DegenerateEigenvalue(String),

    #[error("coupled vector {0} vanishes identically")]
    PhaseUndefined(usize),

    #[error("free parameter #{0} is zero")]
    ZeroParameter(usize),

    #[error("free parameter list has length {got}, expected {expected}")]
    ParameterCount { got: usize, expected: usize },

    #[error("defining linear system is inconsistent: {0}")]
    InconsistentSystem(String),

    #[error("no intertwiner between the representations: {0}")]
    NoIntertwiner(String),
}

impl Error {
    pub(crate) fn relation(name: &str, residual: RMatrix) -> Self {
        Error::RelationViolation {
            relation: name.to_string(),
            residual: Box::new(residual),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
