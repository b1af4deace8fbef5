use thiserror::Error;

/// Errors produced by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sector: L = {len}, 2m = {two_m}")]
    InvalidSector { len: usize, two_m: i64 },

    #[error("configuration {bits:#b} is not in sector 2m = {two_m} of length {len}")]
    NotInSector { bits: u64, len: usize, two_m: i64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sector dimension {dim} exceeds the dense limit {limit}")]
    TooLargeForDense { dim: usize, limit: usize },

    #[error(
        "eigensolver did not converge in sector 2m = {two_m:?} after {matvecs} matvecs \
         (best residual {best_residual:e})"
    )]
    Convergence {
        two_m: Option<i64>,
        matvecs: usize,
        best_residual: f64,
    },

    #[error("anisotropy {delta} is outside the kink regime (requires delta >= 1)")]
    OutOfKinkRegime { delta: f64 },

    #[error("invalid site pair ({a}, {b}) for L = {len}")]
    InvalidPair { a: usize, b: usize, len: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("L = {len} exceeds the oracle limit {limit}")]
    TooLargeForOracle { len: usize, limit: usize },

    #[error("ground state is degenerate across sectors {winners:?}; pin a sector explicitly")]
    DegenerateGroundState { winners: Vec<i64> },

    #[error("no concurrence jump found on the field grid")]
    JumpNotFound,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("h = {h} does not exceed the critical field {h_c}: ferromagnetic phase")]
    FerroPhase { h: f64, h_c: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
