use std::io::{Read, Write};
use std::path::Path;

use asearch_core::{kinetic_energy, Potential, Stepper};

use crate::error::{CliError, CliResult};
use crate::scene::Scene;

pub const RUN_HEADER: [&str; 10] =
    ["step", "t", "H", "E_target", "friction_loss", "alpha", "KE", "PE", "com_v", "newton_iters"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRow {
    pub step: usize,
    pub t: f64,
    pub h: f64,
    pub e_target: f64,
    pub friction_loss: f64,
    /// `NaN` for methods without a velocity weight.
    pub alpha: f64,
    pub ke: f64,
    pub pe: f64,
    pub com_v: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub snapshots: Vec<Snapshot>,
}

impl RunRecord {
    pub fn final_com_v(&self) -> Option<f64> {
        self.rows.last().map(|r| r.com_v)
    }

    /// Largest `|H − E_target|` over the run.
    pub fn max_target_gap(&self) -> f64 {
        self.rows.iter().map(|r| (r.h - r.e_target).abs()).fold(0.0, f64::max)
    }
}

/// Steps the scene for its configured duration.
pub fn simulate(scene: &Scene) -> CliResult<RunRecord> {
    let cfg = &scene.config;
    let mut stepper = Stepper::new(cfg.integrator, cfg.newton)?;
    let mut state = scene.initial.clone();
    let p: &dyn Potential = &scene.potential;
    stepper.init(&mut state, &scene.mass, p)?;

    let steps = cfg.steps();
    let stride = cfg.snapshot_stride();
    let mut record = RunRecord::default();
    let snap = |s: &asearch_core::SystemState| Snapshot { t: s.t, x: s.x.iter().copied().collect(), v: s.v.iter().copied().collect() };
    record.snapshots.push(snap(&state));
    for n in 1..=steps {
        let (next, diag) = stepper
            .step(&state, &scene.mass, p, scene.dissipation.as_ref(), cfg.h)
            .map_err(|source| CliError::Solver { step: n, source })?;
        state = next;
        let ke = kinetic_energy(&state.v, &scene.mass);
        let pe = p.energy(&state.x);
        record.rows.push(RunRow {
            step: n,
            t: state.t,
            h: ke + pe,
            e_target: state.energy_target,
            friction_loss: state.friction_loss,
            alpha: diag.alpha_used,
            ke,
            pe,
            com_v: scene.com_velocity(&state.v),
            newton_iters: diag.newton_iters,
        });
        if n % stride == 0 || n == steps {
            record.snapshots.push(snap(&state));
        }
    }
    Ok(record)
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_string()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_f64(s: &str, line: usize) -> CliResult<f64> {
    s.trim().parse().map_err(|_| CliError::at_line(line, format!("bad number `{s}`")))
}

fn parse_usize(s: &str, line: usize) -> CliResult<usize> {
    s.trim().parse().map_err(|_| CliError::at_line(line, format!("bad integer `{s}`")))
}

pub fn write_run_csv<W: Write>(out: W, rows: &[RunRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::config(format!("csv: {e}"));
    w.write_record(RUN_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.h),
            fmt_f64(r.e_target),
            fmt_f64(r.friction_loss),
            fmt_f64(r.alpha),
            fmt_f64(r.ke),
            fmt_f64(r.pe),
            fmt_f64(r.com_v),
            r.newton_iters.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io("<run csv>", e))
}

pub fn read_run_csv<R: Read>(input: R) -> CliResult<Vec<RunRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| CliError::config(format!("csv: {e}")))?.clone();
    if header.iter().ne(RUN_HEADER) {
        return Err(CliError::at_line(1, "unexpected run CSV header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::at_line(line, format!("csv: {e}")))?;
        if rec.len() != RUN_HEADER.len() {
            return Err(CliError::at_line(line, "wrong column count"));
        }
        rows.push(RunRow {
            step: parse_usize(&rec[0], line)?,
            t: parse_f64(&rec[1], line)?,
            h: parse_f64(&rec[2], line)?,
            e_target: parse_f64(&rec[3], line)?,
            friction_loss: parse_f64(&rec[4], line)?,
            alpha: parse_f64(&rec[5], line)?,
            ke: parse_f64(&rec[6], line)?,
            pe: parse_f64(&rec[7], line)?,
            com_v: parse_f64(&rec[8], line)?,
            newton_iters: parse_usize(&rec[9], line)?,
        });
    }
    Ok(rows)
}

pub fn write_states_csv<W: Write>(out: W, snaps: &[Snapshot]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::config(format!("csv: {e}"));
    let n = snaps.first().map_or(0, |s| s.x.len());
    let header = std::iter::once("t".to_string())
        .chain((0..n).map(|i| format!("x{i}")))
        .chain((0..n).map(|i| format!("v{i}")));
    w.write_record(header).map_err(err)?;
    for s in snaps {
        let row = std::iter::once(fmt_f64(s.t)).chain(s.x.iter().chain(&s.v).map(|&c| fmt_f64(c)));
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io("<states csv>", e))
}

pub fn read_states_csv<R: Read>(input: R) -> CliResult<Vec<Snapshot>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| CliError::config(format!("csv: {e}")))?.clone();
    if header.is_empty() || &header[0] != "t" || header.len() % 2 != 1 {
        return Err(CliError::at_line(1, "states CSV header must be t,x0..xN,v0..vN"));
    }
    let n = (header.len() - 1) / 2;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::at_line(line, format!("csv: {e}")))?;
        let vals = rec.iter().map(|s| parse_f64(s, line)).collect::<CliResult<Vec<f64>>>()?;
        out.push(Snapshot { t: vals[0], x: vals[1..=n].to_vec(), v: vals[n + 1..].to_vec() });
    }
    Ok(out)
}

/// Writes `<stem>.csv` and `<stem>_states.csv` into `dir`.
pub fn write_record(dir: &Path, stem: &str, record: &RunRecord) -> CliResult<(std::path::PathBuf, std::path::PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let run = dir.join(format!("{stem}.csv"));
    let states = dir.join(format!("{stem}_states.csv"));
    let f = std::fs::File::create(&run).map_err(|e| CliError::io(&run, e))?;
    write_run_csv(std::io::BufWriter::new(f), &record.rows)?;
    let f = std::fs::File::create(&states).map_err(|e| CliError::io(&states, e))?;
    write_states_csv(std::io::BufWriter::new(f), &record.snapshots)?;
    Ok((run, states))
}
