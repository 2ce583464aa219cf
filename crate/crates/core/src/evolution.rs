//! Exact time evolution of a [`SpectralState`].
//!
//! Times are passed as `tau = t / t_hat`, where `t_hat = 2 m L^2 / (pi hbar)`
//! is the first revival time. In these units the phase of mode `n` is
//! `pi n^2 tau`, so odd-integer `tau` flips odd modes and keeps even ones, and
//! even-integer `tau` restores every phase exactly.
//!
//! The phase convention is the standard `exp(-i E_n t / hbar)`. Because every
//! `a_n` is real, densities and probabilities are identical under the
//! conjugate convention.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    eigen_energy, eigenfunction_unchecked, initial_wavefunction, PhysicalScales, SpectralState,
    WellGeometry,
};
use crate::numeric::{cos_pi, pairwise_sum, reduced_half_turns, sin_pi, CompensatedSum};

/// Sub-interval `[lo, hi]` of the enlarged well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, big_l: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= big_l) {
            return Err(Error::InvalidInterval { lo, hi, big_l });
        }
        Ok(Self { lo, hi })
    }

    /// `[L - delta, L]`, where the revived state sits.
    pub fn far(geometry: &WellGeometry) -> Self {
        Self { lo: geometry.length() - geometry.delta(), hi: geometry.length() }
    }

    /// `[0, delta]`, the initial support.
    pub fn near(geometry: &WellGeometry) -> Self {
        Self { lo: 0.0, hi: geometry.delta() }
    }

    pub fn whole(geometry: &WellGeometry) -> Self {
        Self { lo: 0.0, hi: geometry.length() }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn check_within(&self, big_l: f64) -> Result<()> {
        Interval::new(self.lo, self.hi, big_l).map(|_| ())
    }
}

/// Raw (unclamped) interval probability and the truncation slack `2d + d^2`:
/// the exact value of the truncated state lies in `[-slack, 1 + slack]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalProbability {
    pub raw: f64,
    pub slack: f64,
}

impl IntervalProbability {
    pub fn within_bounds(&self) -> bool {
        self.raw >= -self.slack && self.raw <= 1.0 + self.slack
    }
}

fn probability_slack(deficit: f64) -> f64 {
    2.0 * deficit + deficit * deficit
}

/// Phase factor `exp(-i E_n t_hat / hbar) = exp(-i pi n^2)`: `+1` for even `n`, `-1` for odd.
pub fn phase_at_revival(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(2k + 1) * 2 m L^2 / (pi hbar)`.
pub fn revival_time(scales: &PhysicalScales, big_l: f64, k: u64) -> f64 {
    let t_hat = 2.0 * scales.mass * big_l * big_l / (PI * scales.hbar);
    (2 * k + 1) as f64 * t_hat
}

/// Complex amplitudes `a_n exp(-i pi n^2 tau)` split into real and imaginary parts.
fn amplitudes(state: &SpectralState, tau: f64) -> (Vec<f64>, Vec<f64>) {
    state
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let r = reduced_half_turns(i + 1, tau);
            (a * cos_pi(r), -a * sin_pi(r))
        })
        .unzip()
}

fn superpose(re: &[f64], im: &[f64], s: f64, big_l: f64) -> Complex64 {
    let mut acc_re = 0.0;
    let mut acc_im = 0.0;
    for (i, (&ar, &ai)) in re.iter().zip(im).enumerate() {
        let phi = eigenfunction_unchecked(i + 1, s, big_l);
        acc_re += ar * phi;
        acc_im += ai * phi;
    }
    Complex64::new(acc_re, acc_im)
}

/// `Psi(x, t)` for `t = tau * t_hat`, summed over the retained modes.
pub fn wavefunction_at(state: &SpectralState, x: f64, tau: f64) -> Result<Complex64> {
    let big_l = state.geometry().length();
    if !(0.0..=big_l).contains(&x) {
        return Err(Error::PositionOutOfRange { x, big_l });
    }
    let (re, im) = amplitudes(state, tau);
    Ok(superpose(&re, &im, x / big_l, big_l))
}

/// Wavefunction on an arbitrary set of positions (all inside `[0, L]`).
pub fn wavefunction_on(state: &SpectralState, xs: &[f64], tau: f64) -> Result<Vec<Complex64>> {
    let big_l = state.geometry().length();
    if let Some(&x) = xs.iter().find(|&&x| !(0.0..=big_l).contains(&x)) {
        return Err(Error::PositionOutOfRange { x, big_l });
    }
    let (re, im) = amplitudes(state, tau);
    Ok(xs.par_iter().map(|&x| superpose(&re, &im, x / big_l, big_l)).collect())
}

/// `int_lo^hi phi_n phi_m dx` in closed form.
pub fn pair_integral(n: usize, m: usize, interval: &Interval, big_l: f64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidModeIndex(0));
    }
    interval.check_within(big_l)?;
    let (lo, hi) = (interval.lo / big_l, interval.hi / big_l);
    let diff = |k: usize| sin_pi(k as f64 * hi) - sin_pi(k as f64 * lo);
    Ok(pair_from_differences(n, m, hi - lo, diff))
}

#[inline]
fn pair_from_differences<D: Fn(usize) -> f64>(n: usize, m: usize, width: f64, diff: D) -> f64 {
    if n == m {
        width - diff(2 * n) / (2 * n) as f64 / PI
    } else {
        let minus = n.abs_diff(m);
        let plus = n + m;
        diff(minus) / (minus as f64 * PI) - diff(plus) / (plus as f64 * PI)
    }
}

/// Largest packed triangle kept in memory (entries); bigger tables are
/// evaluated on the fly from the endpoint sine differences.
const MAX_PACKED_ENTRIES: usize = 1 << 23;

/// `pair_integral(n, m, interval)` for `1 <= n <= m <= N`, built once per interval.
///
/// Small tables store the packed upper triangle; large ones keep only the
/// `O(N)` endpoint differences `sin(k pi hi/L) - sin(k pi lo/L)`.
#[derive(Debug, Clone)]
pub struct PairTable {
    modes: usize,
    interval: Interval,
    width: f64,
    diffs: Vec<f64>,
    packed: Option<Vec<f64>>,
}

impl PairTable {
    pub fn new(modes: usize, interval: &Interval, big_l: f64) -> Result<Self> {
        interval.check_within(big_l)?;
        let (lo, hi) = (interval.lo / big_l, interval.hi / big_l);
        let width = hi - lo;
        let diffs: Vec<f64> =
            (0..=2 * modes).map(|k| sin_pi(k as f64 * hi) - sin_pi(k as f64 * lo)).collect();
        let mut table = Self { modes, interval: *interval, width, diffs, packed: None };
        if modes * (modes + 1) / 2 <= MAX_PACKED_ENTRIES {
            let packed = (0..modes)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let table = &table;
                    (i..modes).map(move |j| table.compute(i + 1, j + 1))
                })
                .collect();
            table.packed = Some(packed);
        }
        Ok(table)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    #[inline]
    fn compute(&self, n: usize, m: usize) -> f64 {
        pair_from_differences(n, m, self.width, |k| self.diffs[k])
    }

    /// Start of row `i` (0-based) in the packed triangle.
    #[inline]
    fn row_start(&self, i: usize) -> usize {
        // rows before i hold N, N-1, ..., N-i+1 entries
        i * self.modes - i * i.saturating_sub(1) / 2
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        let (i, j) = if n <= m { (n - 1, m - 1) } else { (m - 1, n - 1) };
        match &self.packed {
            Some(packed) => packed[self.row_start(i) + j - i],
            None => self.compute(i + 1, j + 1),
        }
    }

    /// `sum_{n,m} Re(c_n conj(c_m)) I_nm` for amplitudes `c = re + i im`.
    fn quadratic_form(&self, re: &[f64], im: &[f64]) -> f64 {
        let rows: Vec<f64> = (0..self.modes)
            .into_par_iter()
            .map(|i| {
                let mut off = 0.0;
                let diagonal = match &self.packed {
                    Some(packed) => {
                        let start = self.row_start(i);
                        let row = &packed[start..start + self.modes - i];
                        for (k, &pair) in row.iter().enumerate().skip(1) {
                            let j = i + k;
                            off += (re[i] * re[j] + im[i] * im[j]) * pair;
                        }
                        row[0]
                    }
                    None => {
                        for j in i + 1..self.modes {
                            off += (re[i] * re[j] + im[i] * im[j]) * self.compute(i + 1, j + 1);
                        }
                        self.compute(i + 1, i + 1)
                    }
                };
                (re[i] * re[i] + im[i] * im[i]) * diagonal + 2.0 * off
            })
            .collect();
        pairwise_sum(&rows)
    }
}

fn interval_probability_with(state: &SpectralState, table: &PairTable, tau: f64) -> f64 {
    let (re, im) = amplitudes(state, tau);
    table.quadratic_form(&re, &im)
}

/// Probability of finding the particle in `interval` at `t = tau * t_hat`:
/// `sum_{n,m} a_n a_m cos(pi (n^2 - m^2) tau) I_nm`.
pub fn interval_probability(
    state: &SpectralState,
    interval: &Interval,
    tau: f64,
) -> Result<IntervalProbability> {
    let table = PairTable::new(state.mode_count(), interval, state.geometry().length())?;
    Ok(IntervalProbability {
        raw: interval_probability_with(state, &table, tau),
        slack: probability_slack(state.deficit()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTimeseries {
    pub interval: Interval,
    pub taus: Vec<f64>,
    pub times: Vec<f64>,
    pub probs: Vec<f64>,
    pub slack: f64,
}

/// Interval probability at each `tau` (non-empty, non-decreasing); the pair
/// table is built once.
pub fn probability_timeseries(
    state: &SpectralState,
    interval: &Interval,
    taus: &[f64],
) -> Result<ProbabilityTimeseries> {
    if taus.is_empty() {
        return Err(Error::EmptyTimes);
    }
    if taus.iter().any(|t| !t.is_finite()) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnorderedTimes);
    }
    let table = PairTable::new(state.mode_count(), interval, state.geometry().length())?;
    let t_hat = state.revival_unit();
    Ok(ProbabilityTimeseries {
        interval: *interval,
        taus: taus.to_vec(),
        times: taus.iter().map(|tau| tau * t_hat).collect(),
        probs: taus.iter().map(|&tau| interval_probability_with(state, &table, tau)).collect(),
        slack: probability_slack(state.deficit()),
    })
}

/// `|Psi(x, t)|^2` on a uniform grid that includes both walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySnapshot {
    pub tau: f64,
    pub time: f64,
    pub xs: Vec<f64>,
    pub densities: Vec<f64>,
    pub deficit: f64,
}

impl DensitySnapshot {
    /// Trapezoid-rule integral of the density over the grid.
    pub fn total_probability(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (x, d) in self.xs.windows(2).zip(self.densities.windows(2)) {
            acc.add(0.5 * (x[1] - x[0]) * (d[0] + d[1]));
        }
        acc.value()
    }
}

/// Uniform grid of `points` positions from 0 to `big_l`, endpoints exact.
pub fn uniform_grid(points: usize, big_l: f64) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| big_l * (i as f64 / last)).collect()
}

pub fn density_snapshot(state: &SpectralState, grid_points: usize, tau: f64) -> Result<DensitySnapshot> {
    if grid_points < 2 {
        return Err(Error::GridTooSmall { required: 2, given: grid_points });
    }
    let xs = uniform_grid(grid_points, state.geometry().length());
    let densities = wavefunction_on(state, &xs, tau)?.iter().map(|z| z.norm_sqr()).collect();
    Ok(DensitySnapshot {
        tau,
        time: tau * state.revival_unit(),
        xs,
        densities,
        deficit: state.deficit(),
    })
}

/// Mean energy `sum a_n^2 E_n` of the truncated state.
pub fn mean_energy(state: &SpectralState) -> f64 {
    *energy_partial_sums(state).last().unwrap_or(&0.0)
}

/// Partial sums `sum_{n<=N} a_n^2 E_n` for `N = 1..=modes`; non-decreasing.
pub fn energy_partial_sums(state: &SpectralState) -> Vec<f64> {
    moment_partial_sums(state, 1)
}

/// Partial sums of `sum a_n^2 E_n^2`. For the quench state `a_n^2 ~ n^-4` and
/// `E_n^2 ~ n^4`, so these grow linearly in `N` and `<H^2>` is infinite.
pub fn second_moment_partial_sums(state: &SpectralState) -> Vec<f64> {
    moment_partial_sums(state, 2)
}

fn moment_partial_sums(state: &SpectralState, power: i32) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    state
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let e = eigen_energy(i + 1, state.geometry(), state.scales()).expect("n >= 1");
            acc.add(a * a * e.powi(power));
            acc.value()
        })
        .collect()
}

/// `pi^2 hbar^2 / (2 m delta^2)`, the ground-state energy of the initial well.
pub fn initial_energy(geometry: &WellGeometry, scales: &PhysicalScales) -> f64 {
    let delta = geometry.delta();
    PI * PI * scales.hbar * scales.hbar / (2.0 * scales.mass * delta * delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevivalReport {
    pub eta: f64,
    pub t_hat: f64,
    pub odd_multiple: u64,
    pub time: f64,
    pub modes: usize,
    pub deficit: f64,
    /// Probability in `[L - delta, L]`.
    pub far_probability: f64,
    /// Probability in `[0, L - delta]`; zero-width when `delta = L`.
    pub rest_probability: f64,
    /// Rigorous lower-bound gap: the far probability is at least `1 - slack`.
    pub slack: f64,
    /// `max |rho(L - x, t) - rho(x, 0)|` against the truncated initial density.
    pub mirror_error: f64,
    /// Same, against the exact initial density `|psi(x)|^2`.
    pub mirror_error_exact: f64,
    pub revived: bool,
}

/// Lower-bound slack on the far-interval probability at an odd multiple of `t_hat`.
///
/// The far mass equals the truncated state's mass on `[0, delta]` at `t = 0`,
/// i.e. `(1 - d) - int_delta^L Psi_N^2`, and the second term is at most
/// `||psi - Psi_N||^2 = d`. A `1e-12` allowance covers rounding.
pub fn revival_slack(deficit: f64) -> f64 {
    2.0 * deficit + 1e-12
}

pub fn revival_report(state: &SpectralState, odd_multiple: u64, grid_points: usize) -> Result<RevivalReport> {
    if odd_multiple % 2 == 0 {
        return Err(Error::InvalidOddMultiple(odd_multiple));
    }
    if grid_points < 2 {
        return Err(Error::GridTooSmall { required: 2, given: grid_points });
    }
    let geometry = state.geometry();
    let big_l = geometry.length();
    let tau = odd_multiple as f64;
    let far = interval_probability(state, &Interval::far(geometry), tau)?.raw;
    let rest_hi = big_l - geometry.delta();
    let rest = if rest_hi > 0.0 {
        interval_probability(state, &Interval::new(0.0, rest_hi, big_l)?, tau)?.raw
    } else {
        0.0
    };

    let at_revival = density_snapshot(state, grid_points, tau)?;
    let initial = density_snapshot(state, grid_points, 0.0)?;
    let mut mirror_error = 0.0f64;
    let mut mirror_error_exact = 0.0f64;
    for (i, &x) in initial.xs.iter().enumerate() {
        let mirrored = at_revival.densities[grid_points - 1 - i];
        mirror_error = mirror_error.max((mirrored - initial.densities[i]).abs());
        let exact = initial_wavefunction(x, geometry).powi(2);
        mirror_error_exact = mirror_error_exact.max((mirrored - exact).abs());
    }
    let slack = revival_slack(state.deficit());
    Ok(RevivalReport {
        eta: geometry.eta(),
        t_hat: state.revival_unit(),
        odd_multiple,
        time: tau * state.revival_unit(),
        modes: state.mode_count(),
        deficit: state.deficit(),
        far_probability: far,
        rest_probability: rest,
        slack,
        mirror_error,
        mirror_error_exact,
        revived: far >= 1.0 - slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{overlap_coefficient, PhysicalScales, WellGeometry};
    use crate::numeric::gauss_legendre;
    use proptest::prelude::*;

    fn state(eta: f64, deficit: f64) -> SpectralState {
        SpectralState::build(WellGeometry::natural(eta).unwrap(), PhysicalScales::natural(), deficit)
            .unwrap()
    }

    #[test]
    fn reconstructs_initial_peak() {
        let s = state(0.5, 1e-8);
        let psi = wavefunction_at(&s, 0.25, 0.0).unwrap();
        assert!((psi.re - 2.0).abs() < 1e-3);
        assert_eq!(psi.im, 0.0);
    }

    #[test]
    fn dirichlet_walls() {
        let s = state(0.3, 1e-6);
        for tau in [0.0, 0.137, 1.0, 12.5] {
            assert_eq!(wavefunction_at(&s, 0.0, tau).unwrap(), Complex64::new(0.0, 0.0));
            assert_eq!(wavefunction_at(&s, 1.0, tau).unwrap().norm(), 0.0);
        }
        assert!(wavefunction_at(&s, 1.01, 0.0).is_err());
        assert!(wavefunction_at(&s, -0.01, 0.0).is_err());
    }

    #[test]
    fn second_revival_restores_wavefunction() {
        let s = state(0.3, 1e-8);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let a = wavefunction_at(&s, x, 0.0).unwrap();
            let b = wavefunction_at(&s, x, 2.0).unwrap();
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn revival_phases() {
        assert_eq!(phase_at_revival(2), 1.0);
        assert_eq!(phase_at_revival(3), -1.0);
        assert_eq!(phase_at_revival(7), -1.0);
        for n in 1..200usize {
            assert_eq!(phase_at_revival(n), cos_pi(reduced_half_turns(n, 1.0)));
        }
    }

    #[test]
    fn pair_integral_orthonormal() {
        let whole = Interval::new(0.0, 1.0, 1.0).unwrap();
        assert!((pair_integral(1, 1, &whole, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(pair_integral(1, 2, &whole, 1.0).unwrap().abs() < 1e-15);
        let table = PairTable::new(100, &whole, 1.0).unwrap();
        for n in 1..=100 {
            for m in 1..=100 {
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((table.get(n, m) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pair_integral_matches_quadrature() {
        let interval = Interval::new(0.7, 1.0, 1.0).unwrap();
        let closed = pair_integral(1, 3, &interval, 1.0).unwrap();
        let f = |x: f64| 2.0 * (PI * x).sin() * (3.0 * PI * x).sin();
        // 10^5 panels of Simpson's rule, written out independently
        let panels = 100_000;
        let h = 0.3 / panels as f64;
        let mut simpson = 0.0;
        for p in 0..panels {
            let a = 0.7 + p as f64 * h;
            simpson += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
        }
        assert!((closed - simpson).abs() < 1e-9);
    }

    #[test]
    fn pair_table_matches_direct() {
        let interval = Interval::new(0.23, 0.81, 2.0).unwrap();
        let table = PairTable::new(40, &interval, 2.0).unwrap();
        for n in 1..=40 {
            for m in 1..=40 {
                let direct = pair_integral(n, m, &interval, 2.0).unwrap();
                assert_eq!(table.get(n, m), direct);
            }
        }
        let g = WellGeometry::new(1.0, 2.0).unwrap();
        for (n, m) in [(1, 1), (3, 5), (12, 7)] {
            let q = gauss_legendre(
                |x| crate::model::eigenfunction(n, x, &g).unwrap() * crate::model::eigenfunction(m, x, &g).unwrap(),
                0.23,
                0.81,
                200,
            );
            assert!((table.get(n, m) - q).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_intervals() {
        assert!(Interval::new(0.5, 0.5, 1.0).is_err());
        assert!(Interval::new(-0.1, 0.5, 1.0).is_err());
        assert!(Interval::new(0.2, 1.1, 1.0).is_err());
        let bad = Interval { lo: 0.0, hi: 2.0 };
        assert!(pair_integral(1, 1, &bad, 1.0).is_err());
        let s = state(0.5, 1e-4);
        assert!(interval_probability(&s, &bad, 0.0).is_err());
    }

    #[test]
    fn unpacked_table_matches_packed() {
        let interval = Interval::new(0.31, 0.9, 1.0).unwrap();
        let packed = PairTable::new(300, &interval, 1.0).unwrap();
        let mut lazy = packed.clone();
        lazy.packed = None;
        let (re, im): (Vec<f64>, Vec<f64>) =
            (1..=300).map(|n| (1.0 / n as f64, 0.5 / (n * n) as f64)).unzip();
        assert_eq!(packed.quadratic_form(&re, &im), lazy.quadratic_form(&re, &im));
        assert_eq!(packed.get(17, 230), lazy.get(230, 17));
    }

    #[test]
    fn whole_well_probability_is_conserved() {
        let s = state(0.3, 1e-6);
        let whole = Interval::whole(s.geometry());
        for tau in [0.0, 0.01, 0.333, 1.0, 7.77] {
            let p = interval_probability(&s, &whole, tau).unwrap();
            assert!((p.raw - (1.0 - s.deficit())).abs() < 1e-12, "tau = {tau}");
        }
    }

    #[test]
    fn near_interval_at_start_and_far_at_revival() {
        let s = state(0.3, 1e-8);
        let g = *s.geometry();
        let near = interval_probability(&s, &Interval::near(&g), 0.0).unwrap();
        assert!(near.raw >= 1.0 - revival_slack(s.deficit()) && near.within_bounds());
        let far = interval_probability(&s, &Interval::far(&g), 1.0).unwrap();
        assert!(far.raw >= 1.0 - revival_slack(s.deficit()));
        // the looser published slack also holds
        let d = s.deficit();
        assert!(far.raw >= 1.0 - 4.0 * d - 2.0 * d.sqrt());
        assert!((far.raw - near.raw).abs() < 1e-12);
    }

    #[test]
    fn revival_times() {
        let n = PhysicalScales::natural();
        assert!((revival_time(&n, 1.0, 0) - 2.0 / PI).abs() < 1e-15);
        assert!((revival_time(&n, 1.0, 1) - 3.0 * 2.0 / PI).abs() < 1e-15);
        let electron = PhysicalScales::new(9e-31, 1.0546e-34, 2.998e8).unwrap();
        let t = revival_time(&electron, 1e-13, 0);
        let expected = 2.0 * 9e-31 * 1e-26 / (PI * 1.0546e-34);
        assert!((t - expected).abs() < 1e-12 * expected);
        assert!((t - 5.433e-23).abs() < 1e-26);
    }

    #[test]
    fn snapshot_shapes() {
        let s = state(0.5, 1e-8);
        assert!(density_snapshot(&s, 1, 0.0).is_err());
        let snap0 = density_snapshot(&s, 201, 0.0).unwrap();
        assert_eq!(snap0.xs[0], 0.0);
        assert_eq!(*snap0.xs.last().unwrap(), 1.0);
        assert_eq!(snap0.densities[0], 0.0);
        assert!(snap0.densities.iter().all(|&d| d >= 0.0));
        for (x, d) in snap0.xs.iter().zip(&snap0.densities) {
            if *x > 0.55 {
                assert!(*d < 1e-5, "leak at x = {x}: {d}");
            }
        }
        assert!((snap0.total_probability() - 1.0).abs() < 1e-3);
        let snap2 = density_snapshot(&s, 201, 2.0).unwrap();
        for (a, b) in snap0.densities.iter().zip(&snap2.densities) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mirror_symmetry_at_revival() {
        for eta in [0.1, 0.3, 0.5] {
            let s = state(eta, 1e-8);
            let report = revival_report(&s, 1, 1001).unwrap();
            let bound = s.truncation_sup_bound();
            assert!(report.mirror_error < 10.0 * bound * bound, "eta = {eta}");
            assert!(report.revived);
        }
    }

    #[test]
    fn odd_multiples_agree() {
        let s = state(0.3, 1e-8);
        let far = Interval::far(s.geometry());
        let series = probability_timeseries(&s, &far, &[1.0, 3.0, 5.0]).unwrap();
        assert!((series.probs[0] - series.probs[1]).abs() < 1e-9);
        assert!((series.probs[0] - series.probs[2]).abs() < 1e-9);
        let single = interval_probability(&s, &far, 1.0).unwrap();
        assert_eq!(series.probs[0], single.raw);
        assert!(revival_report(&s, 2, 11).is_err());
    }

    #[test]
    fn timeseries_rejects_bad_times() {
        let s = state(0.5, 1e-4);
        let far = Interval::far(s.geometry());
        assert_eq!(probability_timeseries(&s, &far, &[]), Err(Error::EmptyTimes));
        assert_eq!(probability_timeseries(&s, &far, &[0.5, 0.2]), Err(Error::UnorderedTimes));
    }

    #[test]
    fn mean_energy_trivial_and_monotone() {
        let s = state(1.0, 1e-8);
        assert!((mean_energy(&s) - PI * PI / 2.0).abs() < 1e-13);
        let s = state(0.5, 1e-8);
        let sums = energy_partial_sums(&s);
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn mean_energy_tail_matches_estimate() {
        // At d(N) <= 1e-8 the missing energy is about 2 / (pi^2 eta N) of E',
        // i.e. ~1.07e-3 relative for every eta < 1.
        let g = WellGeometry::natural(0.5).unwrap();
        let s = SpectralState::build(g, PhysicalScales::natural(), 1e-8).unwrap();
        let e_prime = initial_energy(&g, &PhysicalScales::natural());
        let rel = (e_prime - mean_energy(&s)) / e_prime;
        assert!(rel > 1.0e-3 && rel < 1.1e-3, "rel = {rel:e}");
        // one decade tighter deficit brings it below 1e-3
        let s = SpectralState::build(g, PhysicalScales::natural(), 1e-9).unwrap();
        let rel = (e_prime - mean_energy(&s)) / e_prime;
        assert!(rel < 1e-3, "rel = {rel:e}");
    }

    #[test]
    fn second_moment_grows_without_bound() {
        let s = state(0.5, 1e-9);
        let sums = second_moment_partial_sums(&s);
        let n = sums.len();
        let growth_late = sums[n - 1] - sums[n / 2 - 1];
        let growth_early = sums[n / 2 - 1] - sums[n / 4 - 1];
        // linear growth: doubling the window roughly doubles the increment
        assert!(growth_late > 1.5 * growth_early);
    }

    #[test]
    fn dimensionless_collapse() {
        let scales_a = PhysicalScales::new(1.0, 1.0, 1.0).unwrap();
        let scales_b = PhysicalScales::new(4.0, 1.0, 1.0).unwrap();
        let a = SpectralState::build(WellGeometry::new(0.3, 1.0).unwrap(), scales_a, 1e-8).unwrap();
        let b = SpectralState::build(WellGeometry::new(0.15, 0.5).unwrap(), scales_b, 1e-8).unwrap();
        let taus = [0.0, 0.1, 0.37, 1.0, 2.5];
        let pa = probability_timeseries(&a, &Interval::far(a.geometry()), &taus).unwrap();
        let pb = probability_timeseries(&b, &Interval::far(b.geometry()), &taus).unwrap();
        for (x, y) in pa.probs.iter().zip(&pb.probs) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn probability_matches_direct_double_sum() {
        // Oracle: unsymmetrized double sum with cos((E_n - E_m) t / hbar) in plain arithmetic.
        let s = state(0.4, 1e-4);
        let interval = Interval::new(0.2, 0.75, 1.0).unwrap();
        let tau = 0.2137;
        let t = tau * s.revival_unit();
        let n_modes = s.mode_count();
        let mut direct = 0.0;
        for n in 1..=n_modes {
            for m in 1..=n_modes {
                let en = eigen_energy(n, s.geometry(), s.scales()).unwrap();
                let em = eigen_energy(m, s.geometry(), s.scales()).unwrap();
                direct += overlap_coefficient(n, 0.4).unwrap()
                    * overlap_coefficient(m, 0.4).unwrap()
                    * ((en - em) * t).cos()
                    * pair_integral(n, m, &interval, 1.0).unwrap();
            }
        }
        let p = interval_probability(&s, &interval, tau).unwrap();
        assert!((p.raw - direct).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unitarity_random_times(tau in 0.0f64..50.0, eta in 0.1f64..1.0) {
            let s = state(eta, 1e-5);
            let p = interval_probability(&s, &Interval::whole(s.geometry()), tau).unwrap();
            prop_assert!((p.raw - (1.0 - s.deficit())).abs() < 1e-12);
        }

        #[test]
        fn probabilities_stay_in_bounds(tau in 0.0f64..4.0, lo in 0.0f64..0.9, width in 0.01f64..0.5) {
            let s = state(0.25, 1e-6);
            let hi = (lo + width).min(1.0);
            let p = interval_probability(&s, &Interval::new(lo, hi, 1.0).unwrap(), tau).unwrap();
            prop_assert!(p.within_bounds());
        }

        #[test]
        fn pair_symmetric(n in 1usize..300, m in 1usize..300, lo in 0.0f64..0.5, hi in 0.5f64..1.0) {
            let iv = Interval::new(lo, hi, 1.0).unwrap();
            prop_assert_eq!(pair_integral(n, m, &iv, 1.0).unwrap(), pair_integral(m, n, &iv, 1.0).unwrap());
        }
    }
}
