use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{RawConfig, SceneConfig, KNOWN_KEYS};
use crate::error::{CliError, CliResult};
use crate::record::{fmt_f64, simulate, write_record};
use crate::scene::Scene;

pub const SWEEP_HEADER: [&str; 6] = ["value", "status", "steps", "final_com_v", "final_H", "max_abs_H_minus_E"];

/// Caps sweep concurrency.
pub const THREADS_ENV: &str = "ASEARCH_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    /// `ok` or the error message.
    pub status: String,
    pub steps: usize,
    pub final_com_v: f64,
    pub final_h: f64,
    pub max_target_gap: f64,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Worker count: `requested` (or all cores), capped by `ASEARCH_THREADS`.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

fn run_one(template: &RawConfig, param: &str, value: &str, out: Option<(&Path, String)>) -> SweepRow {
    let result = (|| -> CliResult<SweepRow> {
        let mut raw = template.clone();
        raw.set(param, value)?;
        let cfg = SceneConfig::from_raw(&raw)?;
        let record = simulate(&Scene::build(&cfg)?)?;
        if let Some((dir, stem)) = out {
            write_record(dir, &stem, &record)?;
        }
        let last = record.rows.last();
        Ok(SweepRow {
            value: value.to_string(),
            status: "ok".into(),
            steps: record.rows.len(),
            final_com_v: last.map_or(f64::NAN, |r| r.com_v),
            final_h: last.map_or(f64::NAN, |r| r.h),
            max_target_gap: record.max_target_gap(),
        })
    })();
    result.unwrap_or_else(|e| SweepRow {
        value: value.to_string(),
        status: e.to_string(),
        steps: 0,
        final_com_v: f64::NAN,
        final_h: f64::NAN,
        max_target_gap: f64::NAN,
    })
}

/// One run per value of `param`; failures are recorded, not propagated.
/// Runs are written to `out/<stem>_<index>.csv` when `out` is given.
pub fn sweep(
    template: &RawConfig,
    stem: &str,
    param: &str,
    values: &[String],
    out: Option<&Path>,
    jobs: usize,
) -> CliResult<Vec<SweepRow>> {
    let param = param.trim().to_ascii_lowercase();
    if !KNOWN_KEYS.contains(&param.as_str()) {
        return Err(CliError::config(format!("unknown sweep parameter `{param}`")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, v)| run_one(template, &param, v, out.map(|d| (d, format!("{stem}_{i}")))))
            .collect()
    }))
}

pub fn write_summary<W: Write>(out: W, rows: &[SweepRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::config(format!("csv: {e}"));
    w.write_record(SWEEP_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.value.clone(),
            r.status.clone(),
            r.steps.to_string(),
            fmt_f64(r.final_com_v),
            fmt_f64(r.final_h),
            fmt_f64(r.max_target_gap),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io("<sweep summary>", e))
}

pub fn summary_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}_sweep.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEMPLATE: &str = "[scene]\nkind = harmonic\n[time]\nh = 0.1\nduration = 1\n";

    #[test]
    fn empty_values_give_header_only() {
        let raw = RawConfig::parse(TEMPLATE).unwrap();
        let rows = sweep(&raw, "s", "time.h", &[], None, 1).unwrap();
        let mut buf = Vec::new();
        write_summary(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", SWEEP_HEADER.join(",")));
    }

    #[test]
    fn failures_are_recorded() {
        let raw = RawConfig::parse(TEMPLATE).unwrap();
        let values = vec!["0.1".to_string(), "-1".to_string(), "0.05".to_string()];
        let rows = sweep(&raw, "s", "time.h", &values, None, 2).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].ok() && !rows[1].ok() && rows[2].ok());
        assert_eq!(rows[2].steps, 20);
    }

    #[test]
    fn unknown_parameter() {
        let raw = RawConfig::parse(TEMPLATE).unwrap();
        assert!(sweep(&raw, "s", "time.nope", &[], None, 1).is_err());
    }
}
