use std::path::PathBuf;

use crate::spectral::Field;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("operator `{op}` needs a mean-free field (zero mode = {zero_mode:e})")]
    ZeroMode { op: String, zero_mode: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        allowed: String,
    },

    #[error("velocity is not divergence-free: max |div v| = {max_div:e}")]
    NotDivergenceFree { max_div: f64 },

    #[error("step at t={t} still violates CFL after {halvings} halvings")]
    CflAbort { t: f64, halvings: u32 },

    #[error("non-finite state at t={t}")]
    NonFinite { t: f64, last_good: Box<Field> },

    #[error("spectral support violation: {0}")]
    SupportViolation(String),

    #[error("quadrature did not converge: {what} (error bound {achieved:e})")]
    Quadrature { what: String, achieved: f64 },

    #[error("modulus of continuity cannot reach {target}: {reason}")]
    OmegaRange { target: f64, reason: String },

    #[error("flow map Jacobian drifted by {drift:e} after {steps} steps")]
    FlowDrift { drift: f64, steps: usize },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("time grid is not uniform")]
    NonUniformTime,

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("unknown verification `{0}`")]
    UnknownSuite(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn out_of_range(what: &'static str, value: f64, allowed: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            value,
            allowed: allowed.into(),
        }
    }
}
