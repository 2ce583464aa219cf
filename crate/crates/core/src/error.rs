use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid well geometry: delta = {delta}, L = {big_l} (need 0 < delta <= L)")]
    InvalidGeometry { delta: f64, big_l: f64 },

    #[error("invalid physical scales: {0}")]
    InvalidScales(String),

    #[error("mode index must be at least 1, got {0}")]
    InvalidModeIndex(usize),

    #[error("eta must lie in (0, 1], got {0}")]
    InvalidEta(f64),

    #[error("quadrature needs at least {required} panels, got {given}")]
    InsufficientQuadrature { required: usize, given: usize },

    #[error("deficit target must lie in (0, 1), got {0}")]
    InvalidDeficitTarget(f64),

    #[error("deficit target {target:e} not reached within {cap} modes (deficit {reached:e})")]
    DeficitUnreachable { target: f64, cap: usize, reached: f64 },

    #[error("position {x} outside the well [0, {big_l}]")]
    PositionOutOfRange { x: f64, big_l: f64 },

    #[error("invalid interval [{lo}, {hi}] for well of length {big_l}")]
    InvalidInterval { lo: f64, hi: f64, big_l: f64 },

    #[error("grid needs at least {required} points, got {given}")]
    GridTooSmall { required: usize, given: usize },

    #[error("time list is empty")]
    EmptyTimes,

    #[error("times must be finite and non-decreasing")]
    UnorderedTimes,

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("target time {target} precedes current time {current}")]
    TimeReversal { target: f64, current: f64 },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("grid and spectral states disagree: {0}")]
    Mismatch(String),

    #[error("invalid resolution ladder: {0}")]
    InvalidResolutions(String),

    #[error("odd multiple must be a positive odd integer, got {0}")]
    InvalidOddMultiple(u64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
