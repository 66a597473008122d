use thiserror::Error;

/// Errors raised by model construction and the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GhsError {
    #[error("a model needs at least one physical site")]
    NoSites,

    #[error("the number of states must be at least 2, got {0}")]
    TooFewStates(u32),

    #[error("site {site} is out of range {lo}..={hi}")]
    SiteOutOfRange { site: usize, lo: usize, hi: usize },

    #[error("expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("this operation needs at least 3 sites, got {0}")]
    NeedThreeSites(usize),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("window {s} is out of range 1..={max}")]
    WindowOutOfRange { s: usize, max: usize },

    #[error("row {row} lies outside the active window of the last {window} pairs")]
    RowOutsideWindow { row: usize, window: usize },

    #[error("constraint matrix must have a full active window")]
    PartialWindow,

    #[error("row weight {0} is outside 0..=3")]
    WeightOutOfRange(u8),

    #[error("no value supplied for variable X_{0}")]
    MissingVariable(usize),

    #[error("r must be nonzero to evaluate negative powers")]
    ZeroR,

    #[error("r must be at least 2, got {0}")]
    InvalidR(u32),

    #[error("finite-difference step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("floating-point overflow while evaluating the magnetization")]
    Overflow,

    #[error("the site triple must be pairwise distinct, got ({0}, {1}, {2})")]
    RepeatedSites(usize, usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
}

pub type Result<T> = std::result::Result<T, GhsError>;
