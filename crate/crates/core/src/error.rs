use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical pipeline.
///
/// Each variant names the construction that failed so callers (and the CLI's
/// JSON error channel) can tell a bad input from a numerical breakdown.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("point {x} outside the domain [-1, 1]")]
    Domain { x: f64 },

    #[error("orbit escaped [-1, 1] at iterate {iterate} (value {value})")]
    Escape { iterate: usize, value: f64 },

    #[error("degenerate derivative {derivative} at {x}")]
    DegenerateDerivative { x: f64, derivative: f64 },

    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("root finder did not converge (residual {residual})")]
    NonConvergence { residual: f64 },

    #[error("normalization failure: rescaled critical value {critical_value}")]
    NormalizationFailure { critical_value: f64, boundary: bool },

    #[error("not-renormalizable-at-level {level}")]
    NotRenormalizable { level: usize },

    #[error("tuning failure: deepest level reached {deepest}")]
    TuningFailure { deepest: usize },

    #[error("degenerate partition component at level {level} (length {length})")]
    DegenerateComponent { level: usize, length: f64 },

    #[error("point {x} is not resolved by the partition")]
    UnresolvedPoint { x: f64 },

    #[error("value {y} outside the branch image [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },

    #[error("pullback orbit passes within {distance} of the critical point")]
    CriticalProximity { distance: f64 },

    #[error("combinatorics mismatch at level {level}")]
    CombinatoricsMismatch { level: usize },

    #[error("word {word} is admissible for only one of the two maps")]
    AdmissibilityTransfer { word: String },

    #[error("mesh is not order preserving near {x}")]
    OrderViolation { x: f64 },

    #[error("tower has {available} levels, {requested} requested")]
    InsufficientDepth { requested: usize, available: usize },
}

impl Error {
    /// Short machine-readable kind, used in JSON error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParameterOutOfRange(_) => "parameter-out-of-range",
            Error::Domain { .. } => "domain",
            Error::Escape { .. } => "escape",
            Error::DegenerateDerivative { .. } => "degenerate-derivative",
            Error::NoSignChange { .. } => "no-sign-change",
            Error::NonConvergence { .. } => "non-convergence",
            Error::NormalizationFailure { .. } => "normalization-failure",
            Error::NotRenormalizable { .. } => "not-renormalizable",
            Error::TuningFailure { .. } => "tuning-failure",
            Error::DegenerateComponent { .. } => "degenerate-component",
            Error::UnresolvedPoint { .. } => "unresolved-point",
            Error::OutOfRange { .. } => "out-of-range",
            Error::CriticalProximity { .. } => "critical-proximity",
            Error::CombinatoricsMismatch { .. } => "combinatorics-mismatch",
            Error::AdmissibilityTransfer { .. } => "admissibility-transfer",
            Error::OrderViolation { .. } => "order-violation",
            Error::InsufficientDepth { .. } => "insufficient-depth",
        }
    }
}
