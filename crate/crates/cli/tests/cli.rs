use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asearch_cli::record::{read_run_csv, read_states_csv};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asearch"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const HARMONIC: &str = "[scene]\nkind = harmonic\n[material]\nmass = 2\nstiffness = 50\n\
[integrator]\nmethod = asearch\n[time]\nh = 1e-3\nduration = 0.1\n[initial]\nx = 1\nv = 3\n";

#[test]
fn harmonic_run_holds_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "osc.ini", &HARMONIC.replace("duration = 0.1", "duration = 2"));
    let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_run_csv(std::fs::File::open(dir.path().join("osc.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2000);
    let h0 = 0.5 * 50.0 + 0.5 * 2.0 * 9.0;
    let mut unclipped = 0;
    for r in &rows {
        if r.alpha > 1e-12 && r.alpha < 1.1 - 1e-12 {
            unclipped += 1;
            assert!((r.h - r.e_target).abs() <= 1e-9 * h0, "step {}", r.step);
        }
        assert_eq!(r.e_target, h0);
    }
    assert!(unclipped > 200, "{unclipped}");
    let states = read_states_csv(std::fs::File::open(dir.path().join("osc_states.csv")).unwrap()).unwrap();
    assert_eq!(states.len(), 2001);
}

#[test]
fn zero_duration_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.ini", &HARMONIC.replace("duration = 0.1", "duration = 0"));
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])), 0);
    let text = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(text, "step,t,H,E_target,friction_loss,alpha,KE,PE,com_v,newton_iters\n");
}

#[test]
fn soft_chain_bdf2_final_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "soft.ini",
        "[scene]\nkind = chain_collision\npreset = soft\n[integrator]\nmethod = bdf2\n[time]\nh = 1/30\n",
    );
    let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_run_csv(std::fs::File::open(dir.path().join("soft.csv")).unwrap()).unwrap();
    let v = rows.last().unwrap().com_v;
    assert!((v - 0.776).abs() <= 0.05, "{v}");

    let o = run(&["spectrum", dir.path().join("soft_states.csv").to_str().unwrap(), "--scene", cfg.to_str().unwrap(), "--frames", "last"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,mode,omega,energy");
    assert_eq!(lines.len(), 1 + 31);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.ini", "[scene]\nkind = harmonic\n[time]\nh = 0.1\nduration = 1\nspeed = 3\n");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6"));
    assert_eq!(code(&run(&["run", "/nonexistent/scene.ini"])), 2);
    assert_eq!(code(&run(&["stability", "--methods", "nope", "--hbar-grid", "1"])), 2);
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "hard.ini",
        "[scene]\nkind = chain_collision\npreset = stiff\n[integrator]\nmethod = a1\nnewton_max_iterations = 1\n[time]\nh = 1/30\n",
    );
    let o = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn sweep_records_failures_and_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "osc.ini", HARMONIC);
    let o = bin()
        .args(["sweep", cfg.to_str().unwrap(), "--param", "time.h", "--values", "1e-3,-1,2e-3"])
        .args(["--out", dir.path().to_str().unwrap(), "--jobs", "3"])
        .env("ASEARCH_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
    let summary = std::fs::read_to_string(dir.path().join("osc_sweep.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "value,status,steps,final_com_v,final_H,max_abs_H_minus_E");
    assert!(lines[1].starts_with("1e-3,ok,100,"));
    assert!(!lines[2].contains(",ok,"));
    assert!(lines[3].starts_with("2e-3,ok,50,"));
    assert!(dir.path().join("osc_0.csv").exists() && dir.path().join("osc_2_states.csv").exists());
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "osc.ini", HARMONIC);
    let mut outs = Vec::new();
    for jobs in ["1", "4"] {
        let o = run(&["sweep", cfg.to_str().unwrap(), "--param", "integrator.method", "--values", "a1,asearch,bdf2", "--out", dir.path().to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(code(&o), 0);
        outs.push(o.stdout);
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn beta_sweep_a1_exits_at_unit_speed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wall.ini",
        "[scene]\nkind = point_collision\n[barrier]\nkind = quadratic\nstiffness = 1\n[integrator]\nmethod = a1\n[time]\nh = 1e4\nduration = 1e5\n[initial]\nbeta = 0.5\n",
    );
    let o = run(&["sweep", cfg.to_str().unwrap(), "--param", "initial.beta", "--values", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let v: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{r}");
    }
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "osc.ini", HARMONIC);
    let o = run(&["sweep", cfg.to_str().unwrap(), "--param", "time.h", "--values", "", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "value,status,steps,final_com_v,final_H,max_abs_H_minus_E\n");
}

#[test]
fn collide_and_stability_reports() {
    let o = run(&["collide", "--barrier", "quadratic", "--method", "trapezoidal", "--hbar", "1e8", "--beta", "0.4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "trapezoidal");
    assert_eq!(row[5], "2");
    assert!((row[7].parse::<f64>().unwrap() - 1.4).abs() < 1e-5);

    let o = run(&["stability", "--methods", "a1,symplectic_euler", "--hbar-grid", "5"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,hbar,alpha,tr,det,abs_lambda1,abs_lambda2,unstable");
    assert!(lines[1].starts_with("a1,5.0,1.0,") && lines[1].ends_with(",false"));
    assert!(lines[2].starts_with("symplectic_euler,5.0,,") && lines[2].ends_with(",true"));
}
