use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution has infinite mean (Pareto shape {shape} <= 1)")]
    InfiniteMean { shape: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("brute-force Prohorov limited to {limit} atoms per measure, got {got}")]
    TooManyAtoms { limit: usize, got: usize },

    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("timelines were built from different traces")]
    TraceMismatch,

    #[error("expected a {expected} timeline, got {got}")]
    WrongPolicy { expected: &'static str, got: &'static str },

    #[error("fluid sweep requires traffic intensity <= 1, got {rho}")]
    Supercritical { rho: f64 },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
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
