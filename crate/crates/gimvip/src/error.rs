//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A problem document violated the schema. `field` names the offending key.
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unknown custom {kind} `{name}` (not in the compile-time registry)")]
    UnknownCustom { kind: &'static str, name: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// No closed form and no separable fallback for this (g, omega) pair.
    #[error("unsupported (g, omega) pair: {g} over {omega}")]
    UnsupportedPair { g: String, omega: String },

    #[error("bisection did not reach tolerance {tol:e} (best residual {residual:e})")]
    BisectionNoConvergence { residual: f64, tol: f64 },

    #[error("state became non-finite at step {step} (t = {time})")]
    NonFiniteState { step: usize, time: f64 },

    #[error("iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate sampling: all drawn pairs coincide")]
    DegenerateSampling,

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI contract: 0 success, 1 verdict failure,
    /// 2 input error, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Schema { .. }
            | Error::DimensionMismatch { .. }
            | Error::UnknownCustom { .. }
            | Error::InvalidConfig(_)
            | Error::UnsupportedPair { .. }
            | Error::UnknownBenchmark(_)
            | Error::MalformedCsv { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::BisectionNoConvergence { .. }
            | Error::NonFiniteState { .. }
            | Error::NonConvergence { .. }
            | Error::DegenerateSampling
            | Error::TooFewSamples { .. }
            | Error::InvalidConstants(_) => 3,
        }
    }
}
