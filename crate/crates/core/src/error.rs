use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (max {max})")]
    OutOfRange { index: usize, max: usize },

    #[error("boundary condition mismatch: {0}")]
    BcMismatch(String),

    #[error("time step {dt} exceeds the explicit stability budget {limit}")]
    StabilityBudget { dt: f64, limit: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("too few usable records: {found} (need at least {needed})")]
    TooFewRecords { found: usize, needed: usize },

    #[error("invalid window [{lo}, {hi}]: {reason}")]
    InvalidWindow { lo: f64, hi: f64, reason: String },
}
