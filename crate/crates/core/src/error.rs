//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, proof-object builders, bound
/// evaluators and serialization.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of two operands do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A named hypothesis of a bound or construction fails.
    #[error("precondition `{name}` violated: {detail}")]
    Precondition {
        name: &'static str,
        detail: String,
    },

    /// Operation requested on a coefficient-model variant that does not
    /// support it.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// SNR is undefined for zero noise variance.
    #[error("SNR undefined: noise variance is zero")]
    UndefinedSnr,

    /// Exhaustive support enumeration would exceed the configured cap.
    #[error("enumeration cap exceeded: {detail}; use the Monte Carlo variant")]
    EnumerationCap { detail: String },

    /// Random packing construction did not verify within the attempt budget.
    #[error(
        "packing construction failed after {attempts} attempts \
         (per-attempt failure probability bound {failure_bound:.3e})"
    )]
    PackingConstruction { attempts: usize, failure_bound: f64 },

    /// A linear system is singular or numerically rank deficient.
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    /// No finite sample size reaches the requested target.
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed on-disk artifact (CSV cell, missing file, bad shape).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
