use rayon::prelude::*;

use crate::error::Error;
use crate::evolution::{density_snapshot, probability_timeseries, revival_report, Interval};
use crate::grid::{convergence_order_for, InitialData, Resolution, DEFAULT_REFERENCE_DEFICIT};
use crate::model::{SpectralState, UnitSystem, WellGeometry};
use crate::relativity::build_report;

use super::config::{ConfigError, IntervalSpec, RunConfig, Times};
use super::output::{self, SweepRow};

/// A rendered output file; `name` is used when writing into a directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Whether the command's check passed (revival reached, errors monotone).
    pub passed: bool,
}

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Numeric(Error),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidResolutions(msg) => CommandError::Config(ConfigError::new("resolutions", msg)),
            Error::InvalidInterval { lo, hi, big_l } => CommandError::Config(ConfigError::new(
                "interval",
                format!("[{lo}, {hi}] is not inside [0, {big_l}]"),
            )),
            other => CommandError::Numeric(other),
        }
    }
}

type CmdResult = Result<Outcome, CommandError>;

fn interval_for(spec: IntervalSpec, geometry: &WellGeometry) -> Result<Interval, CommandError> {
    Ok(match spec {
        IntervalSpec::Far => Interval::far(geometry),
        IntervalSpec::Near => Interval::near(geometry),
        IntervalSpec::Explicit { lo, hi } => Interval::new(lo, hi, geometry.length())?,
    })
}

fn taus_for(config: &RunConfig, state: &SpectralState) -> Option<Vec<f64>> {
    match &config.times {
        Some(Times::Tau(v)) => Some(v.clone()),
        Some(Times::Seconds(v)) => Some(v.iter().map(|t| state.tau_of(*t)).collect()),
        None => None,
    }
}

/// Density snapshot per requested time, plus the interval probability series.
pub fn simulate(config: &RunConfig) -> CmdResult {
    let (geometry, scales) = config.physics()?;
    let state = SpectralState::build(geometry, scales, config.deficit)?;
    let key = if config.units == UnitSystem::Natural { "tau" } else { "time" };
    let taus = taus_for(config, &state).ok_or_else(|| ConfigError::new(key, "at least one time is required"))?;
    let interval = interval_for(config.interval, &geometry)?;
    let ext = config.format.extension();
    let mut artifacts = taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let snap = density_snapshot(&state, config.grid_points, tau)?;
            Ok(Artifact { name: format!("snapshot_{i:03}.{ext}"), body: output::snapshot(&snap, config.format) })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let series = probability_timeseries(&state, &interval, &taus)?;
    artifacts.push(Artifact { name: format!("probability.{ext}"), body: output::timeseries(&series, config.format) });
    Ok(Outcome { artifacts, passed: true })
}

pub fn revival(config: &RunConfig) -> CmdResult {
    let (geometry, scales) = config.physics()?;
    let state = SpectralState::build(geometry, scales, config.deficit)?;
    let report = revival_report(&state, config.odd_multiple, config.grid_points)?;
    let ext = config.format.extension();
    Ok(Outcome {
        passed: report.revived,
        artifacts: vec![Artifact { name: format!("revival.{ext}"), body: output::revival(&report, config.format) }],
    })
}

/// One row per eta at the first revival; rows are computed in parallel and kept in input order.
pub fn sweep(config: &RunConfig) -> CmdResult {
    if config.units != UnitSystem::Natural {
        return Err(ConfigError::new("units", "sweep runs in natural units").into());
    }
    if config.etas.is_empty() {
        return Err(ConfigError::new("eta", "at least one value is required").into());
    }
    let rows = config
        .etas
        .par_iter()
        .map(|&eta| {
            let geometry = WellGeometry::natural(eta)?;
            let state = SpectralState::build(geometry, crate::model::PhysicalScales::natural(), config.deficit)?;
            let report = revival_report(&state, 1, config.grid_points)?;
            Ok(SweepRow {
                eta,
                modes: state.mode_count(),
                deficit: state.deficit(),
                far_probability: report.far_probability,
                mirror_error: report.mirror_error,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let ext = config.format.extension();
    Ok(Outcome {
        passed: true,
        artifacts: vec![Artifact { name: format!("sweep.{ext}"), body: output::sweep(&rows, config.format) }],
    })
}

pub fn relativity(config: &RunConfig) -> CmdResult {
    if config.units != UnitSystem::Si {
        return Err(ConfigError::new("units", "relativity requires `units = si`").into());
    }
    let mass = config.mass.ok_or_else(|| ConfigError::new("mass", "required"))?;
    let length = config.length_l.ok_or_else(|| ConfigError::new("length_l", "required"))?;
    let scales = crate::model::PhysicalScales::si(mass)?;
    let report = build_report(mass, length, config.length_delta, &scales)?;
    let ext = config.format.extension();
    Ok(Outcome {
        passed: true,
        artifacts: vec![Artifact { name: format!("relativity.{ext}"), body: output::relativity(&report, config.format) }],
    })
}

/// Crank-Nicolson convergence study against the spectral engine.
pub fn oracle_check(config: &RunConfig) -> CmdResult {
    let (geometry, scales) = config.physics()?;
    let tau = match &config.times {
        None => 0.05,
        Some(Times::Tau(v)) if v.len() == 1 => v[0],
        Some(Times::Seconds(v)) if v.len() == 1 => {
            v[0] / crate::evolution::revival_time(&scales, geometry.length(), 0)
        }
        Some(_) => return Err(ConfigError::new("tau", "oracle-check takes a single time").into()),
    };
    if config.resolutions.len() < 3 {
        return Err(ConfigError::new("resolutions", "at least 3 resolutions are required").into());
    }
    let resolutions: Vec<Resolution> = config
        .resolutions
        .iter()
        .map(|&j| Resolution { intervals: j, dtau: config.dt_ratio / j as f64 })
        .collect();
    let initial = InitialData::Quench { geometry, reference_deficit: DEFAULT_REFERENCE_DEFICIT };
    let report = convergence_order_for(&initial, &scales, tau, &resolutions)?;
    let ext = config.format.extension();
    Ok(Outcome {
        passed: report.monotone,
        artifacts: vec![Artifact { name: format!("convergence.{ext}"), body: output::convergence(&report, config.format) }],
    })
}
