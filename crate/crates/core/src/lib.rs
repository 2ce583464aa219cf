//! Sudden expansion of an infinite square well.
//!
//! A particle in the ground state of `[0, delta]` sees the right wall jump to
//! `L` at `t = 0`. This crate expands the state exactly in the enlarged-well
//! eigenbasis ([`model`]), evolves it in closed form ([`evolution`]), checks
//! it against an independent Crank-Nicolson solver ([`grid`]), and compares
//! the revival time with the light-crossing time ([`relativity`]). The
//! [`cli`] module backs the `well-revival` binary.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod model;
pub mod numeric;
pub mod relativity;

pub use error::{Error, Result};
pub use evolution::{
    density_snapshot, interval_probability, mean_energy, probability_timeseries, revival_report,
    revival_time, wavefunction_at, DensitySnapshot, Interval, IntervalProbability,
    ProbabilityTimeseries, RevivalReport,
};
pub use grid::{ConvergenceReport, GridState, Resolution};
pub use model::{PhysicalScales, SpectralState, UnitSystem, WellGeometry};
pub use relativity::RelativityReport;
