use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("timestamps not strictly increasing at row {row}")]
    NonMonotoneTimestamps { row: usize },

    #[error("missing value at row {row}, asset `{asset}`")]
    MissingValue { row: usize, asset: String },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("price table has no rows left after aligning timestamps")]
    EmptyIntersection,

    #[error("divisor {value:e} below floor at row {row}, asset `{asset}`")]
    DivisionByZero { row: usize, asset: String, value: f64 },

    #[error("series is constant; the regression is singular")]
    ConstantSeries,

    #[error("series too short: need at least {need} samples, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("no usable symbol triples")]
    EmptyTriples,

    #[error("covariance block {block} is not positive definite; consider a positive ridge")]
    NotPositiveDefinite { block: &'static str },

    #[error("all canonical correlations are zero")]
    ZeroCorrelations,

    #[error("rank {t} out of range 0..={max}")]
    RankOutOfRange { t: usize, max: usize },

    #[error("value outside domain: {0}")]
    OutOfDomain(String),

    #[error("infeasible solver configuration: {0}")]
    Infeasible(String),

    #[error("Painleve solution left the admissible envelope near s = {s}")]
    BlowUp { s: f64 },

    #[error("solver did not converge after {iterations} iterations (last update {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
}
