use thiserror::Error;

/// Errors raised by the series kernel, the nonlinearity lifts, the solver and
/// the diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("a truncated series needs at least one coefficient")]
    EmptySeries,

    #[error("non-finite coefficient at index {index}")]
    NonFinite { index: usize },

    #[error("constant term {value:e} is below the singularity floor")]
    Singular { value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("inadmissible beta {beta}: {reason}")]
    InadmissibleBeta { beta: f64, reason: String },

    #[error("numerical blowup: coefficient U({index}) is not finite")]
    NumericalBlowup { index: usize },

    #[error("no root of the boundary residual found in the scan interval")]
    NoRoot,

    #[error("error bound unavailable: {0}")]
    BoundUnavailable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
