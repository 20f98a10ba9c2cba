//! Crate-wide error type for simulation, estimation, and planning.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {qubits} qubits exceeds the {limit}-qubit {repr} limit")]
    WidthExceeded {
        qubits: usize,
        limit: usize,
        repr: &'static str,
    },
    #[error("amplitude count {found} is not a positive power of two")]
    BadAmplitudeCount { found: usize },
    #[error("state norm is {norm:.6e}, cannot normalize")]
    ZeroNorm { norm: f64 },
    #[error("state norm is {norm:.12}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("circuit width {circuit} does not match state width {state}")]
    CircuitWidthMismatch { circuit: usize, state: usize },
    #[error("group {group} carries no measurement assignment")]
    MissingAssignment { group: usize },
    #[error("grouping does not fit the observable: {reason}")]
    InvalidGrouping { reason: String },
    #[error("shot plan has {found} entries for {expected} groups")]
    PlanMismatch { found: usize, expected: usize },
    #[error("shot count must be positive")]
    NoShots,
    #[error("counts hold no shots")]
    EmptyCounts,
    #[error("counts length {found} does not match calibration dimension {expected}")]
    CountsDimensionMismatch { found: usize, expected: usize },
    #[error("calibration matrix is singular or ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("noise parameter {name} = {value} outside [0, 1]")]
    BadNoiseParameter { name: &'static str, value: f64 },
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
