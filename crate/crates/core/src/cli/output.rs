//! CSV and JSON rendering. Floats in CSV carry 17 significant digits, which
//! round-trips every `f64`; JSON uses serde's shortest round-trip form.

use std::fmt::Write as _;

use serde::Serialize;

use crate::evolution::{DensitySnapshot, ProbabilityTimeseries, RevivalReport};
use crate::grid::ConvergenceReport;
use crate::relativity::RelativityReport;

use super::config::OutputFormat;

/// One sweep row.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub modes: usize,
    pub deficit: f64,
    pub far_probability: f64,
    pub mirror_error: f64,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn snapshot(s: &DensitySnapshot, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv(
            "x,density",
            s.xs.iter().zip(&s.densities).map(|(x, d)| vec![fmt_f64(*x), fmt_f64(*d)]),
        ),
        OutputFormat::Json => json(s),
    }
}

pub fn timeseries(ts: &ProbabilityTimeseries, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv(
            "t,tau,probability",
            ts.times
                .iter()
                .zip(&ts.taus)
                .zip(&ts.probs)
                .map(|((t, tau), p)| vec![fmt_f64(*t), fmt_f64(*tau), fmt_f64(*p)]),
        ),
        OutputFormat::Json => json(ts),
    }
}

pub fn sweep(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv(
            "eta,modes,deficit,far_probability,mirror_error",
            rows.iter().map(|r| {
                vec![
                    fmt_f64(r.eta),
                    r.modes.to_string(),
                    fmt_f64(r.deficit),
                    fmt_f64(r.far_probability),
                    fmt_f64(r.mirror_error),
                ]
            }),
        ),
        OutputFormat::Json => json(&rows),
    }
}

pub fn revival(r: &RevivalReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv(
            "eta,t_hat,odd_multiple,time,modes,deficit,far_probability,rest_probability,slack,mirror_error,mirror_error_exact,revived",
            [vec![
                fmt_f64(r.eta),
                fmt_f64(r.t_hat),
                r.odd_multiple.to_string(),
                fmt_f64(r.time),
                r.modes.to_string(),
                fmt_f64(r.deficit),
                fmt_f64(r.far_probability),
                fmt_f64(r.rest_probability),
                fmt_f64(r.slack),
                fmt_f64(r.mirror_error),
                fmt_f64(r.mirror_error_exact),
                r.revived.to_string(),
            ]],
        ),
        OutputFormat::Json => json(r),
    }
}

pub fn relativity(r: &RelativityReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv(
            "mass,length,delta,hbar,c,t_hat,light_crossing,margin,superluminal",
            [vec![
                fmt_f64(r.mass),
                fmt_f64(r.length),
                r.delta.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.hbar),
                fmt_f64(r.c),
                fmt_f64(r.t_hat),
                fmt_f64(r.light_crossing),
                fmt_f64(r.margin),
                r.superluminal.to_string(),
            ]],
        ),
        OutputFormat::Json => json(r),
    }
}

pub fn convergence(r: &ConvergenceReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = csv(
                "intervals,dx,dt,l2_error,linf_error",
                r.resolutions.iter().zip(&r.dx).zip(&r.dt).zip(&r.errors).map(|(((res, dx), dt), e)| {
                    vec![res.intervals.to_string(), fmt_f64(*dx), fmt_f64(*dt), fmt_f64(e.l2), fmt_f64(e.linf)]
                }),
            );
            let _ = writeln!(out, "# fitted_order,{}", fmt_f64(r.fitted_order));
            let _ = writeln!(out, "# monotone,{}", r.monotone);
            out
        }
        OutputFormat::Json => json(r),
    }
}
