//! Light-crossing comparison for the revival time.
//!
//! The revival at the far wall happens at `t_hat = 2 m L^2 / (pi hbar)`. Light
//! needs `L / c` to cross the well. When `margin = (L/c) / t_hat = pi hbar / (2 m L c)`
//! exceeds one, the particle reappears at the far end before any signal could
//! have got there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::revival_time;
use crate::model::PhysicalScales;

/// Order-of-magnitude electron scenario: mass, enlarged well, initial well (SI).
pub mod scenario {
    pub const MASS: f64 = 9e-31;
    pub const LENGTH: f64 = 1e-13;
    pub const DELTA: f64 = 1e-15;
}

pub fn light_crossing_time(length: f64, c: f64) -> f64 {
    length / c
}

/// `pi hbar / (2 m L c)`.
pub fn superluminal_margin(mass: f64, length: f64, scales: &PhysicalScales) -> f64 {
    PI * scales.hbar / (2.0 * mass * length * scales.c)
}

/// Length at which the margin equals one, `pi hbar / (2 m c)`.
pub fn threshold_length(mass: f64, scales: &PhysicalScales) -> f64 {
    PI * scales.hbar / (2.0 * mass * scales.c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativityReport {
    pub mass: f64,
    pub length: f64,
    pub delta: Option<f64>,
    pub hbar: f64,
    pub c: f64,
    pub t_hat: f64,
    pub light_crossing: f64,
    pub margin: f64,
    pub superluminal: bool,
}

pub fn build_report(
    mass: f64,
    length: f64,
    delta: Option<f64>,
    scales: &PhysicalScales,
) -> Result<RelativityReport> {
    let scales = scales.with_mass(mass)?;
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidInput(format!("well length must be positive, got {length}")));
    }
    if let Some(d) = delta {
        if !(d.is_finite() && d > 0.0 && d <= length) {
            return Err(Error::InvalidGeometry { delta: d, big_l: length });
        }
    }
    let t_hat = revival_time(&scales, length, 0);
    let light_crossing = light_crossing_time(length, scales.c);
    let margin = superluminal_margin(mass, length, &scales);
    Ok(RelativityReport {
        mass,
        length,
        delta,
        hbar: scales.hbar,
        c: scales.c,
        t_hat,
        light_crossing,
        margin,
        superluminal: margin > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::constants::{HBAR, SPEED_OF_LIGHT};
    use proptest::prelude::*;

    fn si() -> PhysicalScales {
        PhysicalScales::si(scenario::MASS).unwrap()
    }

    #[test]
    fn crossing_times() {
        let t = light_crossing_time(1e-13, SPEED_OF_LIGHT);
        assert!((t - 3.3356409519815204e-22).abs() < 1e-34);
        assert!((light_crossing_time(SPEED_OF_LIGHT, SPEED_OF_LIGHT) - 1.0).abs() < 1e-15);
        assert_eq!(light_crossing_time(2e-13, SPEED_OF_LIGHT), 2.0 * t);
    }

    #[test]
    fn electron_margin() {
        // rounded constants: pi * 1.0546e-34 / (2 * 9e-31 * 1e-13 * 2.998e8) = 6.1394...
        let rounded = PhysicalScales::new(scenario::MASS, 1.0546e-34, 2.998e8).unwrap();
        let m = superluminal_margin(scenario::MASS, scenario::LENGTH, &rounded);
        assert!((m - 6.1394).abs() < 1e-3, "margin = {m}");
        let codata = superluminal_margin(scenario::MASS, scenario::LENGTH, &si());
        assert!((codata - 6.139).abs() < 2e-3);
        let heavier = superluminal_margin(10.0 * scenario::MASS, scenario::LENGTH, &si());
        assert!((heavier - codata / 10.0).abs() < 1e-12 * codata);
    }

    #[test]
    fn threshold_for_electron() {
        let l_star = threshold_length(scenario::MASS, &si());
        assert!((l_star - 6.139e-13).abs() < 1e-15, "L* = {l_star:e}");
        let at = superluminal_margin(scenario::MASS, l_star, &si());
        assert!((at - 1.0).abs() < 1e-14);
    }

    #[test]
    fn paper_scenario_report() {
        let r = build_report(scenario::MASS, scenario::LENGTH, Some(scenario::DELTA), &si()).unwrap();
        assert!(r.t_hat > 1e-23 && r.t_hat < 1e-21);
        assert!(r.light_crossing > 1e-22 && r.light_crossing < 1e-21);
        assert!(r.superluminal);
        let expected = 2.0 * scenario::MASS * scenario::LENGTH.powi(2) / (PI * HBAR);
        assert!((r.t_hat - expected).abs() < 1e-12 * expected);
        assert_eq!(r.delta, Some(scenario::DELTA));
    }

    #[test]
    fn macroscopic_report() {
        let r = build_report(1.0, 1.0, None, &si()).unwrap();
        assert!((r.margin - 5.5263e-43).abs() < 1e-46, "margin = {:e}", r.margin);
        assert!(!r.superluminal);
    }

    #[test]
    fn report_rejects_bad_inputs() {
        assert!(build_report(scenario::MASS, 1e-13, Some(2e-13), &si()).is_err());
        assert!(build_report(-1.0, 1e-13, None, &si()).is_err());
        assert!(build_report(scenario::MASS, 0.0, None, &si()).is_err());
    }

    proptest! {
        #[test]
        fn margin_identity(log_m in -32.0f64..2.0, log_l in -16.0f64..2.0) {
            let (m, l) = (10f64.powf(log_m), 10f64.powf(log_l));
            let r = build_report(m, l, None, &si()).unwrap();
            prop_assert!((r.margin * r.t_hat - r.light_crossing).abs() <= 1e-12 * r.light_crossing);
            prop_assert_eq!(r.superluminal, r.margin > 1.0);
        }

        #[test]
        fn verdict_antitone(log_m in -32.0f64..-25.0, log_l in -16.0f64..-10.0, f in 1.0f64..100.0) {
            let (m, l) = (10f64.powf(log_m), 10f64.powf(log_l));
            let base = build_report(m, l, None, &si()).unwrap().superluminal;
            let heavier = build_report(m * f, l, None, &si()).unwrap().superluminal;
            let longer = build_report(m, l * f, None, &si()).unwrap().superluminal;
            prop_assert!(!heavier || base);
            prop_assert!(!longer || base);
        }
    }
}
