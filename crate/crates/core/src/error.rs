use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("noise grid does not match the propagation grid")]
    GridMismatch,

    #[error("covariance matrix is not positive semidefinite (pivot {pivot:.3e} at index {index})")]
    NotPositiveSemidefinite { index: usize, pivot: f64 },

    #[error("dense covariance factorization limited to {limit} points, grid has {points}")]
    GridTooLarge { points: usize, limit: usize },

    #[error("{what} blew up at t = {time} (|value| = {magnitude:.3e})")]
    BlowUp { what: &'static str, time: f64, magnitude: f64 },

    #[error("operation requires a {expected} model, got {found}")]
    WrongModelKind { expected: &'static str, found: &'static str },

    #[error(
        "biorthogonal overlap drifted by {drift:.3e} (> {tolerance:.1e}) at step {step} (t = {time}); \
         try a smaller dt"
    )]
    OverlapDrift { step: usize, time: f64, drift: f64, tolerance: f64 },

    #[error("trace of {what} drifted by {drift:.3e} at t = {time}")]
    TraceDrift { what: &'static str, time: f64, drift: f64 },

    #[error("phase undefined at t = {time}: overlap magnitude {magnitude:.3e} below threshold")]
    PhaseSingularity { time: f64, magnitude: f64 },

    #[error("branch jump of {jump:.3} rad at t = {time}; try a smaller dt")]
    BranchJump { time: f64, jump: f64 },

    #[error("{excluded} of {n_traj} trajectories excluded (limit {limit})")]
    ExcessiveExclusions { excluded: usize, n_traj: usize, limit: usize },

    #[error("{formula}: {reason}")]
    Domain { formula: &'static str, reason: String },

    #[error("{context}: {message}")]
    Config { context: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether the error is a per-trajectory phase failure that the ensemble
    /// may exclude rather than abort on.
    pub fn is_phase_failure(&self) -> bool {
        matches!(self, Error::PhaseSingularity { .. } | Error::BranchJump { .. })
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidGrid(_) => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}
