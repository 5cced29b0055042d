//! Error types shared across the crate.

use thiserror::Error;

/// Failures of the geometric polarization machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    /// The receive orientation vector is (numerically) parallel to the wave
    /// travel direction, so its polarization projection is undefined.
    #[error("receive orientation vector is parallel to the wave travel direction")]
    DegenerateProjection,
}

/// Failures of scenario sampling and trial execution.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonteCarloError {
    #[error("scenario sampling hit a degenerate projection {0} times in a row")]
    DegenerateScenarioExhausted(u32),
    #[error("num_trials must be >= 1")]
    NoTrials,
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("no {0} trials present; both truth classes are required for rates")]
    MissingClass(&'static str),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

/// Failures when reading a materials file.
#[derive(Debug, Error)]
pub enum MaterialsError {
    #[error("cannot read materials file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),
}
