//! Small numerical kernels shared by the spectral engine and the grid oracle.
//!
//! Everything here is deterministic: no reduction depends on thread scheduling.

use std::f64::consts::PI;

/// `sin(pi * x)` with argument reduction to the nearest integer, so integer
/// arguments give exactly zero.
#[inline]
pub fn sin_pi(x: f64) -> f64 {
    let k = x.round();
    let s = (PI * (x - k)).sin();
    if is_odd(k) {
        -s
    } else {
        s
    }
}

/// `cos(pi * x)`; exactly `±1` at integer arguments.
#[inline]
pub fn cos_pi(x: f64) -> f64 {
    let k = x.round();
    let c = (PI * (x - k)).cos();
    if is_odd(k) {
        -c
    } else {
        c
    }
}

#[inline]
fn is_odd(k: f64) -> bool {
    (k * 0.5).fract() != 0.0
}

/// `sin(y) / y`, continuous through `y = 0`.
#[inline]
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        let y2 = y * y;
        1.0 - y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0))
    } else {
        y.sin() / y
    }
}

/// Phase `n^2 * tau` reduced modulo 2, in half-turns (multiply by pi for radians).
///
/// The product is split into its rounded value and exact rounding error
/// (fused multiply-add), the rounded part is reduced exactly, and the error
/// term is added afterwards. This keeps the phase accurate to ~1e-16 even when
/// `n^2 * tau` is of order 1e12.
#[inline]
pub fn reduced_half_turns(n: usize, tau: f64) -> f64 {
    let n2 = (n as f64) * (n as f64);
    let p = n2 * tau;
    let err = n2.mul_add(tau, -p);
    (p.rem_euclid(2.0) + err).rem_euclid(2.0)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Pairwise (tree) sum with a fixed split pattern; the result depends only on
/// the order of `values`, never on how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = CompensatedSum::new();
        for &v in values {
            acc.add(v);
        }
        return acc.value();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_663_992_8,
    -0.538_469_310_105_683_091,
    0.0,
    0.538_469_310_105_683_091,
    0.906_179_845_938_663_992_8,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_087_5,
    0.478_628_670_499_366_468,
    0.568_888_888_888_888_888_9,
    0.478_628_670_499_366_468,
    0.236_926_885_056_189_087_5,
];

/// Composite 5-point Gauss-Legendre rule over `[a, b]` with `panels` equal panels.
/// Tenth order in the panel width for smooth integrands.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            panel += weight * f(mid + half * node);
        }
        acc.add(panel * half);
    }
    acc.value()
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -50..50 {
            assert_eq!(sin_pi(k as f64), 0.0);
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(cos_pi(k as f64), expected);
        }
    }

    #[test]
    fn sin_pi_matches_libm() {
        for i in 0..1000 {
            let x = -7.3 + 0.0173 * i as f64;
            assert!((sin_pi(x) - (PI * x).sin()).abs() < 1e-14);
            assert!((cos_pi(x) - (PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn sinc_is_continuous_at_switch() {
        let below = sinc(0.999_999e-3);
        let above = sinc(1.000_001e-3);
        assert!((below - above).abs() < 1e-12);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn reduced_phase_integers() {
        for n in 1..2000usize {
            let r = reduced_half_turns(n, 1.0);
            assert_eq!(r, ((n * n) % 2) as f64);
            assert_eq!(reduced_half_turns(n, 2.0), 0.0);
            assert_eq!(reduced_half_turns(n, 5.0), ((n * n) % 2) as f64);
        }
    }

    #[test]
    fn reduced_phase_large_arguments() {
        // n^2 * 0.1 for n = 10^6 is 10^11 exactly in real arithmetic, i.e. even.
        let r = reduced_half_turns(1_000_000, 0.1);
        assert!(r < 1e-4 || 2.0 - r < 1e-4, "r = {r}");
    }

    #[test]
    fn gauss_legendre_polynomial_exact() {
        let v = gauss_legendre(|x| x.powi(9) - 3.0 * x.powi(4), 0.0, 2.0, 1);
        let exact = 2f64.powi(10) / 10.0 - 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn pairwise_sum_order_only() {
        let values: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(&values), pairwise_sum(&values.clone()));
        let naive: f64 = values.iter().sum();
        assert!((pairwise_sum(&values) - naive).abs() < 1e-12);
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((least_squares_slope(&xs, &ys) - 2.0).abs() < 1e-14);
    }
}
