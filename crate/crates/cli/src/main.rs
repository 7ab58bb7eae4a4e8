use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use asearch_cli::config::{RawConfig, SceneConfig};
use asearch_cli::error::{CliError, CliResult};
use asearch_cli::record::{read_states_csv, simulate, write_record};
use asearch_cli::report::{
    parse_grid, parse_methods, stability_report, write_collision_summary, write_collision_trajectory, write_spectrum,
    write_stability,
};
use asearch_cli::scene::Scene;
use asearch_cli::sweep::{summary_path, sweep, worker_count, write_summary};
use asearch_core::analysis::{collide, BarrierKind, CollisionScenario, ModalBasis};
use asearch_core::IntegratorKind;

#[derive(Parser)]
#[command(name = "asearch", version, about = "Energy-targeting integrators: runs, sweeps and analysis reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Barrier {
    Quadratic,
    Ipc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Frames {
    All,
    Last,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scene and write `<stem>.csv` and `<stem>_states.csv`.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a scene once per value of one parameter (`section.key`).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; fractions such as 1/30 are accepted.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Single particle against a wall at normalized stiffness ħ.
    Collide {
        #[arg(long, value_enum)]
        barrier: Barrier,
        #[arg(long)]
        method: String,
        #[arg(long)]
        hbar: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.1)]
        alpha_max: f64,
        /// Initial energy target as a speed.
        #[arg(long)]
        target_speed: Option<f64>,
        /// Also write the per-step trajectory here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Trace, determinant and eigenvalue moduli of one-step update matrices.
    Stability {
        /// e.g. `a1,midpoint,decoupled:sdirk2`
        #[arg(long)]
        methods: String,
        /// `logspace:a:b:n`, `linspace:a:b:n` or a comma list.
        #[arg(long)]
        hbar_grid: String,
        #[arg(long)]
        alpha_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modal energies of chain snapshots.
    Spectrum {
        states: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        frames: Frames,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = SceneConfig::load(&config)?;
            let record = simulate(&Scene::build(&cfg)?)?;
            let (run, states) = write_record(&out, &stem(&config), &record)?;
            eprintln!("wrote {} and {}", run.display(), states.display());
            Ok(())
        }
        Command::Sweep { config, param, values, out, jobs } => {
            let raw = RawConfig::load(&config)?;
            let values: Vec<String> =
                values.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            let name = stem(&config);
            let rows = sweep(&raw, &name, &param, &values, Some(&out), worker_count(jobs))?;
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let path = summary_path(&out, &name);
            let f = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_summary(std::io::BufWriter::new(f), &rows)?;
            write_summary(std::io::stdout().lock(), &rows)?;
            let failed = rows.iter().filter(|r| !r.ok()).count();
            if failed > 0 {
                return Err(CliError::SweepFailures { failed, total: rows.len() });
            }
            Ok(())
        }
        Command::Collide { barrier, method, hbar, beta, alpha_max, target_speed, trajectory } => {
            let kind: IntegratorKind = method.parse()?;
            if !(hbar > 0.0) {
                return Err(CliError::config(format!("--hbar must be positive, got {hbar}")));
            }
            let barrier = match barrier {
                Barrier::Quadratic => BarrierKind::Quadratic,
                Barrier::Ipc => BarrierKind::Ipc,
            };
            let mut scenario = CollisionScenario::with_hbar(barrier, hbar, beta);
            scenario.alpha_max = alpha_max;
            scenario.target_speed = target_speed;
            scenario.validate()?;
            let report = collide(&scenario, kind).map_err(|source| CliError::Solver { step: 0, source })?;
            write_collision_summary(std::io::stdout().lock(), &scenario, &report)?;
            if trajectory.is_some() {
                write_collision_trajectory(output(&trajectory)?, &report)?;
            }
            Ok(())
        }
        Command::Stability { methods, hbar_grid, alpha_grid, out } => {
            let methods = parse_methods(&methods)?;
            let hbars = parse_grid(&hbar_grid)?;
            let alphas = alpha_grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default();
            let rows = stability_report(&methods, &hbars, &alphas)?;
            write_stability(output(&out)?, &rows)
        }
        Command::Spectrum { states, scene, frames, out } => {
            let cfg = SceneConfig::load(&scene)?;
            let built = Scene::build(&cfg)?;
            let chain = built
                .chain
                .as_ref()
                .ok_or_else(|| CliError::config(format!("spectrum needs a chain scene, got {}", cfg.kind)))?;
            let basis = ModalBasis::new(chain)?;
            let f = std::fs::File::open(&states).map_err(|e| CliError::io(&states, e))?;
            let mut snaps = read_states_csv(std::io::BufReader::new(f))?;
            if let Frames::Last = frames {
                snaps = snaps.pop().into_iter().collect();
            }
            write_spectrum(output(&out)?, &basis, &snaps)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
