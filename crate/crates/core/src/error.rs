use std::path::PathBuf;

use thiserror::Error;

use crate::classical_solver::CausticReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field is below the density floor everywhere (floor {floor:e})")]
    EmptyField { floor: f64 },

    #[error("negative amplitude {value:e} at index {index}")]
    NegativeAmplitude { index: usize, value: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("caustic at t={:.6} (max |lap S| = {:.6e})", .0.time, .0.value)]
    Caustic(CausticReport),

    #[error("norm drift {drift:e} exceeds {limit:e} at t={time:.6}")]
    NormDrift { time: f64, drift: f64, limit: f64 },

    #[error("clamped mass fraction {fraction:e} exceeds budget {budget:e} at t={time:.6}")]
    ClampBudget { time: f64, fraction: f64, budget: f64 },

    #[error("supports overlap: {overlap:e} above tolerance {tolerance:e}")]
    SupportOverlap { overlap: f64, tolerance: f64 },

    #[error("trajectory entered a node region at t={time:.6}")]
    NodeRegion { time: f64 },

    #[error("time {time} outside [{start}, {end}]")]
    OutOfRange { time: f64, start: f64, end: f64 },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("crest lost at frame {frame} (t={time:.6})")]
    LostCrest { frame: usize, time: f64 },

    #[error("winding: {0}")]
    Winding(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
