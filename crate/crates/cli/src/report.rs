use std::io::Write;

use nalgebra::DVector;

use asearch_core::analysis::{stability_rows, CollisionReport, CollisionScenario, LinearMethod, ModalBasis, StabilityRow};

use crate::config::parse_list;
use crate::error::{CliError, CliResult};
use crate::record::{fmt_f64, Snapshot};

pub const STABILITY_HEADER: [&str; 8] = ["method", "hbar", "alpha", "tr", "det", "abs_lambda1", "abs_lambda2", "unstable"];
pub const COLLISION_HEADER: [&str; 9] =
    ["method", "barrier", "hbar", "beta", "alpha_max", "steps", "steps_in_contact", "exit_speed", "v2"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["step", "x", "v", "H"];
pub const SPECTRUM_HEADER: [&str; 4] = ["t", "mode", "omega", "energy"];

/// `logspace:a:b:n` (exponents), `linspace:a:b:n` or a comma list.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::config(format!("bad grid `{spec}`"));
    let spec = spec.trim();
    for (prefix, log) in [("logspace:", true), ("linspace:", false)] {
        if let Some(rest) = spec.strip_prefix(prefix) {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            let pts = (0..n).map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 });
            return Ok(pts.map(|p| if log { 10f64.powf(p) } else { p }).collect());
        }
    }
    parse_list(spec).ok_or_else(bad)
}

pub fn parse_methods(list: &str) -> CliResult<Vec<LinearMethod>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<LinearMethod>().map_err(|e| CliError::config(e.to_string())))
        .collect()
}

pub fn stability_report(methods: &[LinearMethod], hbars: &[f64], alphas: &[f64]) -> CliResult<Vec<StabilityRow>> {
    Ok(stability_rows(methods, hbars, alphas)?)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::config(format!("csv: {e}"))
}

pub fn write_stability<W: Write>(out: W, rows: &[StabilityRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STABILITY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            fmt_f64(r.hbar),
            r.alpha.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.trace),
            fmt_f64(r.det),
            fmt_f64(r.abs_lambda[0]),
            fmt_f64(r.abs_lambda[1]),
            r.unstable.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<stability csv>", e))
}

pub fn write_collision_summary<W: Write>(out: W, scenario: &CollisionScenario, report: &CollisionReport) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLLISION_HEADER).map_err(csv_err)?;
    let barrier = match scenario.barrier {
        asearch_core::analysis::BarrierKind::Quadratic => "quadratic",
        asearch_core::analysis::BarrierKind::Ipc => "ipc",
    };
    w.write_record([
        report.method.clone(),
        barrier.to_string(),
        fmt_f64(scenario.hbar()),
        fmt_f64(scenario.beta),
        fmt_f64(scenario.alpha_max),
        report.steps.to_string(),
        report.steps_in_contact.to_string(),
        fmt_f64(report.exit_speed),
        report.states.get(2).map(|s| fmt_f64(s.1)).unwrap_or_default(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| CliError::io("<collision csv>", e))
}

pub fn write_collision_trajectory<W: Write>(out: W, report: &CollisionReport) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for (n, ((x, v), e)) in report.states.iter().zip(&report.energies).enumerate() {
        w.write_record([n.to_string(), fmt_f64(*x), fmt_f64(*v), fmt_f64(*e)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<trajectory csv>", e))
}

/// Long-format modal energies; mode 0 is the centre-of-mass energy.
pub fn write_spectrum<W: Write>(out: W, basis: &ModalBasis, frames: &[Snapshot]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER).map_err(csv_err)?;
    for f in frames {
        let r = basis.project(&DVector::from_column_slice(&f.x), &DVector::from_column_slice(&f.v))?;
        let t = fmt_f64(f.t);
        w.write_record([t.clone(), "0".into(), "0".into(), fmt_f64(r.com_energy)]).map_err(csv_err)?;
        for (i, (om, e)) in r.frequencies.iter().zip(&r.energies).enumerate() {
            w.write_record([t.clone(), (i + 1).to_string(), fmt_f64(*om), fmt_f64(*e)]).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| CliError::io("<spectrum csv>", e))
}
