//! `sdop` — scenario runner for distributed shortest-distance optimization.
//!
//! Verbs: `run` (integrate + CSV/SVG export), `sweep` (one run per parameter
//! value, residual table), `check` (connectivity / schedule conditions, no
//! simulation), `oracle` (centralized optimal solution).
//!
//! Exit codes: 0 success, 2 validation hard-error, 3 divergence, 4 parse
//! error.

mod config;
mod export;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sdop_core::{diagnostics, sim, ConditionStatus, Error, SimConfig, TheoremTag, Trajectory};

use config::ConfigError;

const EXIT_INVALID: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_PARSE: u8 = 4;

#[derive(Parser)]
#[command(name = "sdop", version, about = "distributed shortest-distance optimization runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Override a scenario key, e.g. --override stepsize.value=0.5 (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Suppress informational output.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and export trajectory CSV, diagnostics CSV and an SVG plot.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory (defaults to the scenario's output.dir, then "out").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the scenario for each value of one parameter and tabulate terminal residuals.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted scenario key to vary, e.g. stepsize.value.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate connectivity, dwell-time and schedule conditions without simulating.
    Check {
        #[command(flatten)]
        common: Common,
        /// Force the condition set to check: t3, t4 or t6.
        #[arg(long)]
        theorem: Option<String>,
    },
    /// Solve the scenario's optimization problem centrally and print the solution.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

struct Failure(u8, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Parse(_) => Failure(EXIT_PARSE, e.to_string()),
            ConfigError::Invalid(_) => Failure(EXIT_INVALID, e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, out } => cmd_run(&common, out.as_deref()),
        Command::Sweep {
            common,
            param,
            values,
            out,
        } => cmd_sweep(&common, &param, &values, out.as_deref()),
        Command::Check { common, theorem } => cmd_check(&common, theorem.as_deref()),
        Command::Oracle { common } => cmd_oracle(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load_config(common: &Common) -> Result<(config::ScenarioFile, SimConfig), Failure> {
    let scenario = config::load(&common.scenario, &common.overrides)?;
    let sim = scenario.to_sim_config()?;
    Ok((scenario, sim))
}

fn pick_theorem(cfg: &SimConfig) -> TheoremTag {
    if cfg.stepsize.is_constant() && cfg.angle.is_constant() {
        TheoremTag::T6
    } else if diagnostics::intersection_nonempty(&cfg.family) {
        TheoremTag::T3
    } else {
        TheoremTag::T4
    }
}

fn print_conditions(cfg: &SimConfig, theorem: TheoremTag, quiet: bool) {
    let report = sim::validate_conditions(cfg, theorem);
    if quiet {
        return;
    }
    println!("condition checks ({:?}):", report.theorem);
    for c in &report.checks {
        let tag = match c.status {
            ConditionStatus::Satisfied => "ok",
            ConditionStatus::Violated => "VIOLATED",
            ConditionStatus::Unknown => "unknown",
        };
        println!("  [{tag}] {}: {}", c.name, c.reason);
    }
    for n in &report.notes {
        println!("  note: {n}");
    }
}

fn run_failure(e: Error) -> Failure {
    match e {
        Error::Diverged { t, norm } => Failure(
            EXIT_DIVERGED,
            format!("state diverged at t = {t} (norm {norm:.3e})"),
        ),
        other => Failure(EXIT_INVALID, other.to_string()),
    }
}

fn mean_state(traj: &Trajectory) -> Vec<f64> {
    let s = traj.samples.last().unwrap();
    let n = s.states.len() as f64;
    let m = s.states[0].len();
    let mut mean = vec![0.0; m];
    for x in &s.states {
        for k in 0..m {
            mean[k] += x[k] / n;
        }
    }
    mean
}

fn cmd_run(common: &Common, out: Option<&Path>) -> Result<(), Failure> {
    let (scenario, cfg) = load_config(common)?;
    print_conditions(&cfg, pick_theorem(&cfg), common.quiet);

    let started = Instant::now();
    let traj = sdop_core::integrate(&cfg).map_err(run_failure)?;
    let elapsed = started.elapsed();

    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", dir.display())))?;
    let write = |name: &str, data: String| -> Result<PathBuf, Failure> {
        let path = dir.join(name);
        std::fs::write(&path, data)
            .map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", path.display())))?;
        Ok(path)
    };
    let paths = [
        write("trajectory.csv", export::trajectory_csv(&traj))?,
        write("diagnostics.csv", export::diagnostics_csv(&traj))?,
        write("plot.svg", export::plot_svg(&traj))?,
    ];

    let last = &traj.samples.last().unwrap().record;
    if !common.quiet {
        println!("run complete: t_end = {}, {} samples", last.t, traj.samples.len());
        println!("  H          = {:.6e}", last.consensus_diameter);
        match last.h {
            Some(h) => println!("  h          = {h:.6e}"),
            None => println!("  h          = n/a (empty intersection)"),
        }
        println!("  hbar       = {:.6e}", last.hbar);
        println!("  f_bar      = {:.6e}", last.f_bar);
        println!("  clamps     = {}", traj.clamp_events);
        println!("  wall clock = {:.2?}", elapsed);
        for p in &paths {
            println!("  wrote {}", p.display());
        }
    }
    Ok(())
}

fn cmd_sweep(
    common: &Common,
    param: &str,
    values: &[f64],
    out: Option<&Path>,
) -> Result<(), Failure> {
    if values.is_empty() {
        return Err(Failure(EXIT_INVALID, "sweep needs at least one value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // The base file may be incomplete without the swept key (e.g. a kind
    // switched by override), so resolve it with the first value filled in.
    let mut base_overrides = common.overrides.clone();
    base_overrides.push(format!("{param}={}", sorted[0]));
    let scenario = config::load(&common.scenario, &base_overrides)?;
    let base_cfg = scenario.to_sim_config()?;
    let star = diagnostics::solve_centralized(&base_cfg.family, 1e-12, 2_000_000)
        .map_err(|e| Failure(EXIT_INVALID, format!("oracle failed: {e}")))?;

    // Independent runs, one thread per value.
    let rows: Vec<(f64, Result<(f64, f64), String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = sorted
            .iter()
            .map(|&v| {
                let scenario_path = common.scenario.clone();
                let mut overrides = common.overrides.clone();
                overrides.push(format!("{param}={v}"));
                let x_star = star.x_star.clone();
                scope.spawn(move || {
                    let run = || -> Result<(f64, f64), String> {
                        let sc = config::load(&scenario_path, &overrides)
                            .map_err(|e| e.to_string())?;
                        let cfg = sc.to_sim_config().map_err(|e| e.to_string())?;
                        let traj = sdop_core::integrate(&cfg).map_err(|e| e.to_string())?;
                        let mean = mean_state(&traj);
                        let residual = mean
                            .iter()
                            .zip(&x_star)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        let h = traj.samples.last().unwrap().record.consensus_diameter;
                        Ok((residual, h))
                    };
                    (v, run())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut csv = String::from("value,residual,H,status\n");
    if !common.quiet {
        println!("{:>12} {:>16} {:>16}  status", param, "residual", "H");
    }
    for (v, row) in &rows {
        match row {
            Ok((res, h)) => {
                csv.push_str(&format!(
                    "{},{},{},ok\n",
                    export::fmt_f64(*v),
                    export::fmt_f64(*res),
                    export::fmt_f64(*h)
                ));
                if !common.quiet {
                    println!("{v:>12.4} {res:>16.8e} {h:>16.8e}  ok");
                }
            }
            Err(e) => {
                csv.push_str(&format!("{},,,error: {e}\n", export::fmt_f64(*v)));
                if !common.quiet {
                    println!("{v:>12.4} {:>16} {:>16}  error: {e}", "-", "-");
                }
            }
        }
    }

    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", dir.display())))?;
    let path = dir.join("sweep.csv");
    std::fs::write(&path, csv)
        .map_err(|e| Failure(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    if !common.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_check(common: &Common, theorem: Option<&str>) -> Result<(), Failure> {
    let (_, cfg) = load_config(common)?;
    let theorem = match theorem {
        Some("t3") | Some("T3") => TheoremTag::T3,
        Some("t4") | Some("T4") => TheoremTag::T4,
        Some("t6") | Some("T6") => TheoremTag::T6,
        Some(other) => {
            return Err(Failure(
                EXIT_INVALID,
                format!("unknown theorem tag `{other}` (expected t3, t4 or t6)"),
            ))
        }
        None => pick_theorem(&cfg),
    };

    let tau = cfg.graph.dwell_time();
    if !common.quiet {
        println!("dwell time = {tau}, dt = {} (limit {})", cfg.dt, tau / 10.0);
        println!("undirected = {}", cfg.graph.is_undirected());
    }

    if cfg.graph.is_periodic() {
        let period = cfg.graph.total_duration();
        let mut connected_at = None;
        for mult in [1.0, 2.0, 4.0] {
            let w = period * mult;
            if cfg.graph.is_ujsc(w).map_err(|e| Failure(EXIT_INVALID, e.to_string()))? {
                connected_at = Some(w);
                break;
            }
        }
        if !common.quiet {
            match connected_at {
                Some(w) => println!("jointly strongly connected at window {w}"),
                None => println!(
                    "NOT jointly strongly connected (windows tried: {period}, {}, {})",
                    2.0 * period,
                    4.0 * period
                ),
            }
        }
    } else if !common.quiet {
        println!("joint connectivity undecidable: schedule is not periodic");
    }

    print_conditions(&cfg, theorem, common.quiet);

    if theorem == TheoremTag::T4 && !cfg.graph.is_undirected() {
        return Err(Failure(
            EXIT_INVALID,
            "the empty-intersection convergence conditions require undirected graphs, \
             but the schedule has a one-way arc"
                .into(),
        ));
    }
    Ok(())
}

fn cmd_oracle(common: &Common) -> Result<(), Failure> {
    let (_, cfg) = load_config(common)?;
    let sol = diagnostics::solve_centralized(&cfg.family, 1e-12, 2_000_000)
        .map_err(|e| Failure(EXIT_INVALID, e.to_string()))?;
    println!("x*         = {:?}", sol.x_star);
    println!("f*         = {:.12e}", sol.f_star);
    println!("residual   = {:.3e}", sol.residual);
    println!("iterations = {}", sol.iterations);
    println!("unique     = {}", sol.unique);
    Ok(())
}
