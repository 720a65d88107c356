//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid window [{a}, {b}]: require a <= -1 and b >= 2")]
    InvalidWindow { a: i64, b: i64 },

    #[error("window too short: need at least {need} points, have {have}")]
    WindowTooShort { need: usize, have: usize },

    #[error("index {index} out of range [{lo}, {hi}]")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("sequence ranges differ: [{lo_a}, {hi_a}] vs [{lo_b}, {hi_b}]")]
    RangeMismatch {
        lo_a: i64,
        hi_a: i64,
        lo_b: i64,
        hi_b: i64,
    },

    #[error("sequence does not cover required range [{lo}, {hi}]")]
    InsufficientCoverage { lo: i64, hi: i64 },

    #[error("delta = {delta} outside [0, pi/2)")]
    InvalidDelta { delta: f64 },

    #[error("invalid impulse parameters: {0}")]
    InvalidImpulse(String),

    #[error("potential value q_{index} = {value} violates lower bound {bound}")]
    PotentialBound { index: i64, value: f64, bound: f64 },

    #[error("explicit potential has no value at n = {index}")]
    PotentialUndefined { index: i64 },

    #[error("fundamental system degenerate: Wronskian vanishes near n = {index}")]
    FundamentalSystemDegenerate { index: i64 },

    #[error("decay precondition violated at n = {index}: |value| = {magnitude:.3e}")]
    DecayViolation { index: i64, magnitude: f64 },

    #[error("input does not solve the system: residual {residual:.3e} at n = {site}")]
    NotASolution { site: i64, residual: f64 },

    #[error("window too small on the {side} side: extend to roughly {required}")]
    WindowTooSmall { side: &'static str, required: i64 },

    #[error("value overflowed double precision at n = {index}")]
    Overflow { index: i64 },

    #[error("{what} failed to converge after {iterations} iterations ({diagnostics})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        diagnostics: String,
    },

    #[error("internal invariant breach: {0}")]
    InvariantBreach(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// CLI exit code category: 1 config, 2 numerical, 3 internal breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::InvariantBreach(_) => 3,
            _ => 2,
        }
    }
}
