use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("pinning amplitude max|h| = {max_h} exceeds 500")]
    PinningOverflow { max_h: f64 },

    #[error("patch radius {radius} must be below l/4 = {limit}")]
    PatchTooLarge { radius: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elliptic solve did not converge: {iters} iterations, residual {residual:e}")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("time step {dt:e} violates CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("Picard iteration diverging: sup differences {sup_diffs:?}")]
    Divergence { sup_diffs: Vec<f64> },

    #[error("sigma query at {value} outside sampled curve range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("bisection bracket invalid: sigma(-t) = {at_lower}, sigma(0) = {at_upper}")]
    BracketFailure { at_lower: f64, at_upper: f64 },

    #[error("initial vorticity takes negative values (min {min:e})")]
    NegativeVorticity { min: f64 },

    #[error("need at least 3 snapshots, got {0}")]
    InsufficientSnapshots(usize),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("bad snapshot {}: {reason}", path.display())]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
