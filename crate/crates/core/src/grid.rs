//! Crank-Nicolson finite-difference oracle.
//!
//! Evolves the wavefunction on a uniform grid with Dirichlet walls, entirely
//! independently of the spectral engine, so the two can be cross-checked.
//! Each step solves `(I + i D) psi_new = (I - i D) psi_old` with
//! `D = dt / (2 hbar) * H_h` and `H_h` the three-point kinetic operator.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{uniform_grid, wavefunction_on};
use crate::model::{
    eigenfunction_unchecked, initial_wavefunction, PhysicalScales, SpectralState, WellGeometry,
};
use crate::numeric::{least_squares_slope, CompensatedSum};

pub const MIN_INTERVALS: usize = 8;

/// Default normalization deficit of the spectral reference in convergence studies.
pub const DEFAULT_REFERENCE_DEFICIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    geometry: WellGeometry,
    xs: Vec<f64>,
    psi: Vec<Complex64>,
    time: f64,
    dx: f64,
    dt: Option<f64>,
    /// `|sum |psi_j|^2 dx - 1|` of the raw samples before renormalization.
    sampling_norm_error: f64,
}

impl GridState {
    /// Grid with `intervals + 1` points sampling `f`, renormalized to unit discrete norm.
    pub fn from_fn<F: Fn(f64) -> f64>(geometry: WellGeometry, intervals: usize, f: F) -> Result<Self> {
        if intervals < MIN_INTERVALS {
            return Err(Error::GridTooSmall { required: MIN_INTERVALS, given: intervals });
        }
        let big_l = geometry.length();
        let xs = uniform_grid(intervals + 1, big_l);
        let dx = big_l / intervals as f64;
        let mut psi: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        psi[0] = Complex64::new(0.0, 0.0);
        psi[intervals] = Complex64::new(0.0, 0.0);
        let norm = discrete_norm(&psi, dx);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("initial samples have zero norm".into()));
        }
        let scale = 1.0 / norm.sqrt();
        psi.iter_mut().for_each(|z| *z *= scale);
        Ok(Self {
            geometry,
            xs,
            psi,
            time: 0.0,
            dx,
            dt: None,
            sampling_norm_error: (norm - 1.0).abs(),
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Last step size used, if any step was taken.
    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    pub fn geometry(&self) -> &WellGeometry {
        &self.geometry
    }

    pub fn intervals(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn sampling_norm_error(&self) -> f64 {
        self.sampling_norm_error
    }

    pub fn norm(&self) -> f64 {
        discrete_norm(&self.psi, self.dx)
    }

    pub fn densities(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Trapezoid-rule probability on `[lo, hi]`, using grid points inside it.
    pub fn interval_probability(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for j in 0..self.intervals() {
            let (a, b) = (self.xs[j], self.xs[j + 1]);
            if a >= lo && b <= hi {
                acc.add(0.5 * self.dx * (self.psi[j].norm_sqr() + self.psi[j + 1].norm_sqr()));
            }
        }
        acc.value()
    }
}

fn discrete_norm(psi: &[Complex64], dx: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for z in psi {
        acc.add(z.norm_sqr());
    }
    acc.value() * dx
}

/// Samples the quench initial state on `intervals + 1` points.
pub fn initialize_grid(geometry: &WellGeometry, intervals: usize) -> Result<GridState> {
    let g = *geometry;
    GridState::from_fn(g, intervals, |x| initial_wavefunction(x, &g))
}

/// LU factors of the constant tridiagonal matrix `I + i D` restricted to the
/// interior points (Thomas algorithm, forward sweep precomputed).
#[derive(Debug, Clone)]
struct CrankNicolson {
    /// off-diagonal coupling `beta = dt hbar / (4 m dx^2)`
    beta: f64,
    /// forward-sweep multipliers `c'_j`
    upper: Vec<Complex64>,
    /// inverse pivots
    inv_pivot: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(interior: usize, dx: f64, dt: f64, scales: &PhysicalScales) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let beta = dt * scales.hbar / (4.0 * scales.mass * dx * dx);
        let diag = Complex64::new(1.0, 2.0 * beta);
        let off = Complex64::new(0.0, -beta);
        let mut upper = Vec::with_capacity(interior);
        let mut inv_pivot = Vec::with_capacity(interior);
        let mut prev_upper = Complex64::new(0.0, 0.0);
        for row in 0..interior {
            let pivot = diag - off * prev_upper;
            if pivot.norm() < f64::MIN_POSITIVE.sqrt() || !pivot.is_finite() {
                return Err(Error::SingularSystem { row });
            }
            let inv = pivot.inv();
            prev_upper = off * inv;
            upper.push(prev_upper);
            inv_pivot.push(inv);
        }
        Ok(Self { beta, upper, inv_pivot })
    }

    /// One step on the interior values in place; `scratch` must match in length.
    fn apply(&self, interior: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = interior.len();
        let b = self.beta;
        let rhs_diag = Complex64::new(1.0, -2.0 * b);
        let rhs_off = Complex64::new(0.0, b);
        let off = Complex64::new(0.0, -b);
        // right-hand side (I - i D) psi, then forward sweep
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let left = if j > 0 { interior[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { interior[j + 1] } else { Complex64::new(0.0, 0.0) };
            let rhs = rhs_diag * interior[j] + rhs_off * (left + right);
            prev = (rhs - off * prev) * self.inv_pivot[j];
            scratch[j] = prev;
        }
        // back substitution
        interior[n - 1] = scratch[n - 1];
        for j in (0..n - 1).rev() {
            interior[j] = scratch[j] - self.upper[j] * interior[j + 1];
        }
    }
}

/// One Crank-Nicolson step of length `dt`.
pub fn step_crank_nicolson(state: &GridState, dt: f64, scales: &PhysicalScales) -> Result<GridState> {
    let mut next = state.clone();
    let interior = state.intervals() - 1;
    let stepper = CrankNicolson::new(interior, state.dx, dt, scales)?;
    let mut scratch = vec![Complex64::new(0.0, 0.0); interior];
    stepper.apply(&mut next.psi[1..=interior], &mut scratch);
    next.time += dt;
    next.dt = Some(dt);
    Ok(next)
}

/// Repeated steps of `dt` up to `t_final`; the last step is shortened to land on it exactly.
pub fn evolve_to(state: &GridState, t_final: f64, dt: f64, scales: &PhysicalScales) -> Result<GridState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(t_final >= state.time) {
        return Err(Error::TimeReversal { target: t_final, current: state.time });
    }
    let mut next = state.clone();
    let span = t_final - state.time;
    if span == 0.0 {
        return Ok(next);
    }
    let interior = state.intervals() - 1;
    let mut scratch = vec![Complex64::new(0.0, 0.0); interior];
    let full_steps = (span / dt).floor() as u64;
    let remainder = span - full_steps as f64 * dt;
    let stepper = CrankNicolson::new(interior, state.dx, dt, scales)?;
    for _ in 0..full_steps {
        stepper.apply(&mut next.psi[1..=interior], &mut scratch);
    }
    next.dt = Some(dt);
    // skip a remainder that is only rounding noise
    if remainder > 1e-9 * dt {
        let last = CrankNicolson::new(interior, state.dx, remainder, scales)?;
        last.apply(&mut next.psi[1..=interior], &mut scratch);
        next.dt = Some(remainder);
    }
    next.time = t_final;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// Discrete L2 and max-norm distance between the grid wavefunction and the
/// spectral wavefunction evaluated at the grid's own points.
pub fn compare_with_spectral(grid: &GridState, spectral: &SpectralState) -> Result<ErrorNorms> {
    let (g, s) = (grid.geometry(), spectral.geometry());
    let same_geometry = (g.delta() - s.delta()).abs() <= 1e-12 * s.length()
        && (g.length() - s.length()).abs() <= 1e-12 * s.length();
    if !same_geometry {
        return Err(Error::Mismatch(format!(
            "geometry (delta, L) = ({}, {}) vs ({}, {})",
            g.delta(),
            g.length(),
            s.delta(),
            s.length()
        )));
    }
    let tau = spectral.tau_of(grid.time());
    let reference = wavefunction_on(spectral, grid.xs(), tau)?;
    let mut acc = CompensatedSum::new();
    let mut linf = 0.0f64;
    for (a, b) in grid.psi().iter().zip(&reference) {
        let d = (a - b).norm();
        acc.add(d * d);
        linf = linf.max(d);
    }
    Ok(ErrorNorms { l2: (acc.value() * grid.dx()).sqrt(), linf })
}

/// Like [`compare_with_spectral`], but also checks the grid sits at `tau` (in revival units).
pub fn compare_at(grid: &GridState, spectral: &SpectralState, tau: f64) -> Result<ErrorNorms> {
    let expected = tau * spectral.revival_unit();
    if (grid.time() - expected).abs() > 1e-12 * expected.abs().max(spectral.revival_unit()) {
        return Err(Error::Mismatch(format!("grid time {} vs requested {}", grid.time(), expected)));
    }
    compare_with_spectral(grid, spectral)
}

/// One grid resolution: `intervals` spatial intervals and a time step `dtau` in revival units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub intervals: usize,
    pub dtau: f64,
}

impl Resolution {
    /// Ladder of `levels` resolutions starting at `intervals`, each halving
    /// `dx` and `dtau`, with `dtau = dt_ratio * dx / L`.
    pub fn ladder(intervals: usize, levels: usize, dt_ratio: f64) -> Vec<Self> {
        (0..levels)
            .map(|k| {
                let j = intervals << k;
                Self { intervals: j, dtau: dt_ratio / j as f64 }
            })
            .collect()
    }
}

/// Initial data for a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// The quench ground state; reference built to the given deficit.
    Quench { geometry: WellGeometry, reference_deficit: f64 },
    /// A finite superposition `sum c_n phi_n` (smooth data).
    Modes { geometry: WellGeometry, coefficients: Vec<f64> },
}

impl InitialData {
    fn geometry(&self) -> &WellGeometry {
        match self {
            InitialData::Quench { geometry, .. } | InitialData::Modes { geometry, .. } => geometry,
        }
    }

    fn reference(&self, scales: &PhysicalScales) -> Result<SpectralState> {
        match self {
            InitialData::Quench { geometry, reference_deficit } => {
                SpectralState::build(*geometry, *scales, *reference_deficit)
            }
            InitialData::Modes { geometry, coefficients } => {
                SpectralState::from_coefficients(*geometry, *scales, coefficients.clone())
            }
        }
    }

    fn sample(&self, intervals: usize) -> Result<GridState> {
        match self {
            InitialData::Quench { geometry, .. } => initialize_grid(geometry, intervals),
            InitialData::Modes { geometry, coefficients } => {
                let big_l = geometry.length();
                GridState::from_fn(*geometry, intervals, |x| {
                    coefficients
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * eigenfunction_unchecked(i + 1, x / big_l, big_l))
                        .sum()
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub tau: f64,
    pub resolutions: Vec<Resolution>,
    pub dx: Vec<f64>,
    pub dt: Vec<f64>,
    pub errors: Vec<ErrorNorms>,
    /// Least-squares slope of `ln(L2 error)` against `ln(dx)`.
    pub fitted_order: f64,
    pub monotone: bool,
}

fn validate_ladder(resolutions: &[Resolution]) -> Result<()> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidResolutions(format!(
            "need at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    for r in resolutions {
        if r.intervals < MIN_INTERVALS || !(r.dtau.is_finite() && r.dtau > 0.0) {
            return Err(Error::InvalidResolutions(format!("bad resolution {r:?}")));
        }
    }
    for w in resolutions.windows(2) {
        let space = w[1].intervals as f64 / w[0].intervals as f64;
        let time = w[0].dtau / w[1].dtau;
        if space <= 1.0 {
            return Err(Error::InvalidResolutions("each level must refine dx".into()));
        }
        if (space - time).abs() > 1e-9 * space {
            return Err(Error::InvalidResolutions(format!(
                "dx refined by {space} but dt by {time}"
            )));
        }
    }
    Ok(())
}

/// Convergence study for the quench state against a spectral reference
/// with deficit [`DEFAULT_REFERENCE_DEFICIT`].
pub fn convergence_order(
    geometry: &WellGeometry,
    scales: &PhysicalScales,
    tau: f64,
    resolutions: &[Resolution],
) -> Result<ConvergenceReport> {
    let initial = InitialData::Quench {
        geometry: *geometry,
        reference_deficit: DEFAULT_REFERENCE_DEFICIT,
    };
    convergence_order_for(&initial, scales, tau, resolutions)
}

/// Evolves each resolution to `tau` (in parallel) and fits the error slope.
pub fn convergence_order_for(
    initial: &InitialData,
    scales: &PhysicalScales,
    tau: f64,
    resolutions: &[Resolution],
) -> Result<ConvergenceReport> {
    validate_ladder(resolutions)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidInput(format!("target tau must be positive, got {tau}")));
    }
    let reference = initial.reference(scales)?;
    let t_hat = reference.revival_unit();
    let big_l = initial.geometry().length();
    let errors = resolutions
        .par_iter()
        .map(|r| {
            let start = initial.sample(r.intervals)?;
            let end = evolve_to(&start, tau * t_hat, r.dtau * t_hat, scales)?;
            compare_at(&end, &reference, tau)
        })
        .collect::<Result<Vec<_>>>()?;
    let dx: Vec<f64> = resolutions.iter().map(|r| big_l / r.intervals as f64).collect();
    let dt: Vec<f64> = resolutions.iter().map(|r| r.dtau * t_hat).collect();
    let log_dx: Vec<f64> = dx.iter().map(|h| h.ln()).collect();
    let log_err: Vec<f64> = errors.iter().map(|e| e.l2.ln()).collect();
    Ok(ConvergenceReport {
        tau,
        resolutions: resolutions.to_vec(),
        dx,
        dt,
        monotone: errors.windows(2).all(|w| w[1].l2 < w[0].l2),
        fitted_order: least_squares_slope(&log_dx, &log_err),
        errors,
    })
}
