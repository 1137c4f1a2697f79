use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial division left a nonzero remainder")]
    InexactDivision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("state and parameter must be different symbols (both are `{0}`)")]
    SameSymbol(String),
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown symbol `{name}` at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("invalid exponent at byte {pos}: {message}")]
    InvalidExponent { pos: usize, message: String },
    #[error("expression is not a polynomial in the state: symbolic exponent at byte {pos}")]
    NotPolynomialInState { pos: usize },
    #[error("parameter `{param}` appears with power {power}; the system must be affine in it")]
    ParameterNotAffine { param: String, power: usize },
    #[error("parameter `{0}` does not appear in the expression")]
    NoParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("branch {branch} received split stability votes ({agree} of {total} agree)")]
    AmbiguousLabel { branch: String, agree: usize, total: usize },
    #[error("branch {branch} could not be reached by any usable parameter column")]
    Unlabeled { branch: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("f + lambda*g vanishes identically at lambda = {0}")]
    IdenticallyZero(String),
}

/// Any failure of the end-to-end pipeline, tagged with the step that failed.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse: {0}")]
    Parse(#[from] ExprError),
    #[error("decomposition: {0}")]
    Decompose(#[from] PolyError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("stability: {0}")]
    Stability(#[from] StabilityError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
}
