//! Well configuration, the enlarged-well eigenbasis, and the overlap
//! coefficients that fix the spectral state right after the wall is removed.
//!
//! The particle starts in the ground state of `[0, delta]`. At `t = 0` the
//! right wall jumps to `L`, and the (unchanged) wavefunction is re-expanded in
//! the eigenfunctions of `[0, L]`. Every coefficient depends on the geometry
//! only through `eta = delta / L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, sin_pi, sinc, CompensatedSum};

/// CODATA 2018 values in SI units.
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Speed of light in vacuum, m / s.
    pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
    /// Electron rest mass, kg.
    pub const ELECTRON_MASS: f64 = 9.109_383_7e-31;
}

/// Default ceiling on the number of retained modes.
pub const DEFAULT_MODE_CAP: usize = 1_000_000;

/// Half-width (in `n * eta`) of the window around the removable singularity
/// `n * eta = 1` inside which the coefficient is evaluated in reduced form.
const SINGULAR_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellGeometry {
    delta: f64,
    big_l: f64,
}

impl WellGeometry {
    pub fn new(delta: f64, big_l: f64) -> Result<Self> {
        let ok = delta.is_finite() && big_l.is_finite() && delta > 0.0 && delta <= big_l;
        if !ok {
            return Err(Error::InvalidGeometry { delta, big_l });
        }
        Ok(Self { delta, big_l })
    }

    /// Unit-length enlarged well with `delta = eta`.
    pub fn natural(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Self::new(eta, 1.0)
    }

    /// Width of the initial well.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Width of the enlarged well.
    pub fn length(&self) -> f64 {
        self.big_l
    }

    pub fn eta(&self) -> f64 {
        self.delta / self.big_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Natural,
    Si,
}

/// Mass, reduced Planck constant and light speed.
///
/// In natural units `hbar = mass = 1`; `c` is carried only for the
/// relativity report and is set to 1 there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    pub mass: f64,
    pub hbar: f64,
    pub c: f64,
}

impl PhysicalScales {
    pub fn new(mass: f64, hbar: f64, c: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("hbar", hbar), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScales(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mass, hbar, c })
    }

    pub fn natural() -> Self {
        Self { mass: 1.0, hbar: 1.0, c: 1.0 }
    }

    /// SI scales for a particle of the given mass (kg), with CODATA `hbar` and `c`.
    pub fn si(mass: f64) -> Result<Self> {
        Self::new(mass, constants::HBAR, constants::SPEED_OF_LIGHT)
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        Self::new(mass, self.hbar, self.c)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEta(eta))
    }
}

fn check_mode(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidModeIndex(n))
    } else {
        Ok(())
    }
}

/// Ground state of the initial well, zero outside `[0, delta]`.
pub fn initial_wavefunction(x: f64, geometry: &WellGeometry) -> f64 {
    let delta = geometry.delta;
    if !(0.0..=delta).contains(&x) {
        return 0.0;
    }
    (2.0 / delta).sqrt() * sin_pi(x / delta)
}

/// `E_n = pi^2 hbar^2 n^2 / (2 m L^2)`.
pub fn eigen_energy(n: usize, geometry: &WellGeometry, scales: &PhysicalScales) -> Result<f64> {
    check_mode(n)?;
    let n = n as f64;
    let l = geometry.big_l;
    Ok(PI * PI * scales.hbar * scales.hbar * n * n / (2.0 * scales.mass * l * l))
}

/// `phi_n(x) = sqrt(2/L) sin(n pi x / L)` on `[0, L]`, zero outside.
pub fn eigenfunction(n: usize, x: f64, geometry: &WellGeometry) -> Result<f64> {
    check_mode(n)?;
    let l = geometry.big_l;
    if !(0.0..=l).contains(&x) {
        return Ok(0.0);
    }
    Ok(eigenfunction_unchecked(n, x / l, l))
}

/// `phi_n` at the reduced coordinate `s = x / L`.
#[inline]
pub(crate) fn eigenfunction_unchecked(n: usize, s: f64, big_l: f64) -> f64 {
    (2.0 / big_l).sqrt() * sin_pi(n as f64 * s)
}

/// Closed-form overlap `<phi_n | psi> = (2/pi) sqrt(eta) sin(pi n eta) / (1 - n^2 eta^2)`.
///
/// Near `n eta = 1` the quotient is rewritten with `u = n eta - 1` as
/// `pi sinc(pi u) / (2 + u)`, which is exact, smooth, and equals the
/// limit `pi / 2` at `u = 0` (coefficient `sqrt(eta)`).
pub fn overlap_coefficient(n: usize, eta: f64) -> Result<f64> {
    check_mode(n)?;
    check_eta(eta)?;
    Ok(overlap_unchecked(n, eta))
}

#[inline]
fn overlap_unchecked(n: usize, eta: f64) -> f64 {
    let x = n as f64 * eta;
    let u = x - 1.0;
    let ratio = if u.abs() < SINGULAR_WINDOW {
        PI * sinc(PI * u) / (2.0 + u)
    } else {
        sin_pi(x) / (1.0 - x * x)
    };
    2.0 / PI * eta.sqrt() * ratio
}

/// Minimum number of Gauss-Legendre panels accepted by [`coefficient_oracle`].
pub fn oracle_min_panels(n: usize, eta: f64) -> usize {
    20 * (n as f64 * eta).ceil() as usize + 50
}

/// Independent estimate of `a_n` by direct quadrature of `int_0^delta psi phi_n dx`
/// (composite 5-point Gauss-Legendre, `panels` panels).
pub fn coefficient_oracle(n: usize, geometry: &WellGeometry, panels: usize) -> Result<f64> {
    check_mode(n)?;
    let required = oracle_min_panels(n, geometry.eta());
    if panels < required {
        return Err(Error::InsufficientQuadrature { required, given: panels });
    }
    let delta = geometry.delta;
    let l = geometry.big_l;
    let norm = (2.0 / delta).sqrt() * (2.0 / l).sqrt();
    let k_psi = PI / delta;
    let k_phi = n as f64 * PI / l;
    let integrand = |x: f64| norm * (k_psi * x).sin() * (k_phi * x).sin();
    Ok(gauss_legendre(integrand, 0.0, delta, panels))
}

/// `d(N) = 1 - sum_{n<=N} a_n^2` for `N = 1..=n_max`.
pub fn normalization_deficits(eta: f64, n_max: usize) -> Result<Vec<f64>> {
    check_eta(eta)?;
    let mut acc = CompensatedSum::new();
    Ok((1..=n_max)
        .map(|n| {
            let a = overlap_unchecked(n, eta);
            acc.add(a * a);
            (1.0 - acc.value()).max(0.0)
        })
        .collect())
}

/// Truncated real expansion of the post-quench state in the enlarged-well basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    geometry: WellGeometry,
    scales: PhysicalScales,
    coefficients: Vec<f64>,
    deficit: f64,
}

impl SpectralState {
    /// Smallest truncation whose normalization deficit is at most `target_deficit`.
    pub fn build(geometry: WellGeometry, scales: PhysicalScales, target_deficit: f64) -> Result<Self> {
        Self::build_with_cap(geometry, scales, target_deficit, DEFAULT_MODE_CAP)
    }

    pub fn build_with_cap(
        geometry: WellGeometry,
        scales: PhysicalScales,
        target_deficit: f64,
        mode_cap: usize,
    ) -> Result<Self> {
        if !(target_deficit > 0.0 && target_deficit < 1.0) {
            return Err(Error::InvalidDeficitTarget(target_deficit));
        }
        let eta = geometry.eta();
        let mut coefficients = Vec::new();
        let mut norm = CompensatedSum::new();
        let mut deficit = 1.0;
        while deficit > target_deficit {
            if coefficients.len() == mode_cap {
                return Err(Error::DeficitUnreachable {
                    target: target_deficit,
                    cap: mode_cap,
                    reached: deficit,
                });
            }
            let a = overlap_unchecked(coefficients.len() + 1, eta);
            coefficients.push(a);
            norm.add(a * a);
            deficit = (1.0 - norm.value()).max(0.0);
        }
        Ok(Self { geometry, scales, coefficients, deficit })
    }

    /// State with explicitly given coefficients `c_1..c_N` (at most unit norm).
    pub fn from_coefficients(
        geometry: WellGeometry,
        scales: PhysicalScales,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite and non-empty".into()));
        }
        let mut norm = CompensatedSum::new();
        for c in &coefficients {
            norm.add(c * c);
        }
        let deficit = 1.0 - norm.value();
        if deficit < -1e-12 {
            return Err(Error::InvalidInput(format!("coefficient norm exceeds 1 by {:e}", -deficit)));
        }
        Ok(Self { geometry, scales, coefficients, deficit: deficit.max(0.0) })
    }

    pub fn geometry(&self) -> &WellGeometry {
        &self.geometry
    }

    pub fn scales(&self) -> &PhysicalScales {
        &self.scales
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mode_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// First revival time `2 m L^2 / (pi hbar)` in the state's units.
    pub fn revival_unit(&self) -> f64 {
        let l = self.geometry.big_l;
        2.0 * self.scales.mass * l * l / (PI * self.scales.hbar)
    }

    /// Converts a physical time to revival units.
    pub fn tau_of(&self, t: f64) -> f64 {
        t / self.revival_unit()
    }

    /// Sup-norm bound on `|psi - Psi_N(., 0)|`: `sqrt(2/L) * sum_{n>N} |a_n|`,
    /// with the tail summed in closed form from `|a_n| <= (2/pi) sqrt(eta) / (n^2 eta^2 - 1)`.
    pub fn truncation_sup_bound(&self) -> f64 {
        let eta = self.geometry.eta();
        let n = self.mode_count() as f64;
        if self.deficit == 0.0 {
            return 0.0;
        }
        // sum_{k>N} 1/(k^2 eta^2 - 1) <= int_N^inf dk / (k^2 eta^2 - 1)
        //   = atanh(1 / (N eta)) / eta, valid for N eta > 1.
        let x = n * eta;
        let tail = if x > 1.0 { (1.0 / x).atanh() / eta } else { f64::INFINITY };
        (2.0 / self.geometry.big_l).sqrt() * 2.0 / PI * eta.sqrt() * tail
    }
}
