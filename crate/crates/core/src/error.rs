use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NonHermitianInput { residual: f64 },

    #[error("invalid point on the parameter sphere: {0}")]
    InvalidPoint(String),

    #[error("invalid duration: {0}")]
    InvalidDuration(String),

    #[error("invalid order {0}: must be at least 1")]
    InvalidOrder(i64),

    #[error("time {t} outside the loop interval [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("arc index {index} out of range for a loop of {len} arcs")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("loop is outside the pole-meridian-equator family")]
    UnsupportedLoop,

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("{steps} steps too few: trace drifted by {drift:e}")]
    StepCountTooSmall { steps: usize, drift: f64 },

    #[error("at least {min} input states required, got {got}")]
    TooFewStates { min: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no interior maximum in window [{lo}, {hi}]")]
    NoPeakInWindow { lo: f64, hi: f64 },

    #[error("{points} points cannot determine {params} free coefficients")]
    UnderdeterminedFit { points: usize, params: usize },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
