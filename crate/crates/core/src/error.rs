use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("word uses generator index {index} but the group has rank {rank}")]
    ContextMismatch { index: usize, rank: usize },

    #[error("the identity has no conjugacy class in conj'")]
    EmptyClass,

    #[error("enumeration of {requested} elements exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("power iteration did not converge after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("no axial witness found within search radius {radius}")]
    WitnessNotFound { radius: usize },

    #[error("provider `{provider}` lacks the {capability} capability")]
    MissingCapability { provider: String, capability: &'static str },

    #[error("generating set is not closed under inversion: {0} has no inverse in the set")]
    NotSymmetric(String),

    #[error("generating set does not generate: {0} unreachable within budget")]
    NotGenerating(String),

    #[error("negative translation length {value:e} on class {class}")]
    NegativeLength { class: String, value: f64 },

    #[error("root bracket failure on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("radius {radius} too small (minimum {minimum})")]
    RadiusTooSmall { radius: usize, minimum: usize },

    #[error("all shells empty or zero-weight")]
    AllZeroShells,

    #[error("grid needs at least {minimum} points, got {got}")]
    GridTooSmall { got: usize, minimum: usize },

    #[error("parameter {value} outside the covered range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("boundary pair: infinite dilation witnessed by {0}")]
    BoundaryPair(String),

    #[error("inconsistent boundary data: Dil(d, d + d_inf) = {dil}")]
    InconsistentBoundary { dil: f64 },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
