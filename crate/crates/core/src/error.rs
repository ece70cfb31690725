use thiserror::Error;

/// Errors raised by measure construction, transport and barycenter routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("probability level {0} outside the open interval (0, 1)")]
    Domain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cost must be strictly convex: {0}")]
    NotStrictlyConvex(String),

    #[error("no Monge map: source atom at {atom} must be split between several targets")]
    NoMongeMap { atom: f64 },

    #[error("instance too large for the LP oracle: {rows} x {cols} cells exceeds {limit}")]
    SizeLimit {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("cost `{0}` carries no growth constants (A, B)")]
    GrowthConstantsMissing(String),

    #[error("monotonicity violated: {0}")]
    Monotonicity(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
