use thiserror::Error;

/// Every failure the library can report. Variants are grouped by the module
/// that raises them; messages stay lowercase.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // measures
    #[error(
        "integration did not converge before the node cap ({nodes} nodes, last change {change:e})"
    )]
    NonConvergence { nodes: usize, change: f64 },
    #[error("point {re}{im:+}i lies on or too close to the support [{a}, {b}]")]
    PointOnSupport { re: f64, im: f64, a: f64, b: f64 },
    #[error("supports overlap: [{a0}, {b0}] and [{a1}, {b1}]")]
    OverlappingSupports { a0: f64, b0: f64, a1: f64, b1: f64 },
    #[error("cannot invert a measure with zero mass")]
    SingularInversion,
    #[error("moment sequence is not that of a constant-sign measure (recurrence coefficient {index} = {value:e})")]
    IndefiniteHankel { index: usize, value: f64 },
    #[error("cauchy factor changes sign on the base support ({label})")]
    SignChangeDetected { label: String },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    // nikishin
    #[error("generators {first} and {second} have overlapping convex hulls")]
    AdjacentOverlap { first: usize, second: usize },
    #[error("mixed system components do not share the same base measure")]
    SharedBaseMismatch,

    // hermite_pade
    #[error("nullspace has dimension {nullity} (gap {gap:e}); the index is not normal")]
    NullspaceTooLarge { nullity: usize, gap: f64 },
    #[error("moment matrix is ill conditioned (gap {gap:e})")]
    IllConditioned { gap: f64 },
    #[error("form is not normal")]
    NotNormal,
    #[error("leading coefficient of component {component} vanishes")]
    ZeroLeadingCoefficient { component: usize },
    #[error("found {found} sign changes, expected {expected}")]
    ZeroCountMismatch { found: usize, expected: usize },
    #[error("integration contour passes through a zero")]
    ContourThroughZero,
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),

    // reduction
    #[error("constants at infinity disagree: {lhs} vs {rhs}")]
    ConstantMismatch { lhs: f64, rhs: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("derivate construction failed: {0}")]
    DerivateConstructionFailed(String),

    // equilibrium
    #[error("bad probability vector: {0}")]
    BadProbabilityVector(String),
    #[error("interaction matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    IndefiniteInteraction(f64),
    #[error("equilibrium solver stopped after {iterations} iterations (residual {residual:e})")]
    EquilibriumNonConvergence { iterations: usize, residual: f64 },

    // cli
    #[error("input error: {0}")]
    InputError(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("validation error: {0}")]
    ValidationError(String),
    #[error("io error: {0}")]
    IoError(String),
    /// A checked property of the theory failed; `claim` names the property.
    #[error("assertion failed ({claim}): {detail}")]
    AssertionFailure { claim: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoError(e.to_string())
    }
}
