use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavcov::control::optimal_altitude;
use uavcov::io::{write_metrics_json, write_trajectory_csv};
use uavcov::partition::{compute_all_cells, warn_on_containment, SwarmState};
use uavcov::scenario::{load, Scenario, ScenarioError};
use uavcov::sim::{gradient_check, h_opt, run, SimConfig};
use uavcov::svg::render_snapshot;

const GRADIENT_TOL: f64 = 1e-3;
const GRADIENT_STEP: f64 = 1e-5;
const JITTERED_PROBES: usize = 4;

#[derive(Parser)]
#[command(name = "uavcov", version, about = "Coverage control for UAV teams with conic sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trajectory.csv, metrics.json and snapshots.
    Run {
        /// Bundled scenario name (case_study_1, case_study_2) or a TOML path.
        scenario: String,
        /// Comma-separated steps to render: `first`, `last` or a step number.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<String>,
        /// Compare control inputs against finite differences before running.
        #[arg(long)]
        check_gradient: bool,
        /// Output directory; overrides the scenario's own.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the jittered gradient probes.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the optimal altitude and the ideal criterion value.
    OptimalAltitude { scenario: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Snapshot {
    First,
    Last,
    Step(usize),
}

fn parse_snapshots(items: &[String]) -> Result<Vec<Snapshot>, String> {
    items
        .iter()
        .map(|s| match s.trim() {
            "first" => Ok(Snapshot::First),
            "last" => Ok(Snapshot::Last),
            n => n
                .parse()
                .map(Snapshot::Step)
                .map_err(|_| format!("--snapshots: expected first, last or a step number, got {n:?}")),
        })
        .collect()
}

fn load_scenario(name: &str) -> Result<Scenario, ExitCode> {
    load(name).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            ScenarioError::Io { .. } => ExitCode::from(1),
            ScenarioError::Parse(_) | ScenarioError::Validation { .. } => ExitCode::from(2),
        }
    })
}

/// The initial state and a few seeded perturbations of it, kept inside the
/// altitude band and the domain.
fn gradient_probes(s: &SwarmState, seed: u64) -> Vec<SwarmState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![s.clone()];
    let (lo, hi) = (s.model.z_min(), s.model.z_max());
    let mut attempts = 0;
    while out.len() <= JITTERED_PROBES && attempts < 100 * JITTERED_PROBES {
        attempts += 1;
        let mut p = s.clone();
        for n in &mut p.nodes {
            n.q.x += rng.gen_range(-0.05..0.05);
            n.q.y += rng.gen_range(-0.05..0.05);
            n.z = (n.z + rng.gen_range(-0.05..0.05)).clamp(lo + 0.01, hi - 0.01);
        }
        if p.validate().is_ok() {
            out.push(p);
        }
    }
    out
}

fn check_gradient(sc: &Scenario, seed: u64) -> bool {
    let mut worst: f64 = 0.0;
    for s in gradient_probes(&sc.state, seed) {
        for g in gradient_check(&s, GRADIENT_STEP, &sc.sim.quadrature) {
            worst = worst.max(g.max_rel_error);
        }
    }
    println!("gradient check: max relative finite-difference error {worst:.3e}");
    worst <= GRADIENT_TOL
}

/// State after exactly `k` steps, by deterministic re-simulation.
fn state_at(sc: &Scenario, k: usize) -> anyhow::Result<(usize, SwarmState)> {
    let cfg = SimConfig {
        steps: k,
        record_every: k.max(1),
        ..sc.sim
    };
    let log = run(&sc.state, &cfg)?;
    Ok((log.steps_taken, log.final_state))
}

fn write_snapshot(dir: &Path, name: &str, k: usize, s: &SwarmState) -> anyhow::Result<PathBuf> {
    let cells = compute_all_cells(s);
    let path = dir.join(format!("snapshot_step_{k}.svg"));
    let svg = render_snapshot(s, &cells, &format!("{name}, step {k}"));
    std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run_command(
    sc: Scenario,
    snapshots: &[Snapshot],
    gradient: bool,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let seed = seed.unwrap_or(sc.sim.seed);
    if gradient && !check_gradient(&sc, seed) {
        eprintln!("error: gradient check exceeded {GRADIENT_TOL:e}");
        return Ok(ExitCode::from(3));
    }
    let dir = out
        .or_else(|| sc.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let log = run(&sc.state, &sc.sim)?;
    info!(
        "{}: {} after {} steps",
        sc.name,
        if log.converged { "converged" } else { "stopped" },
        log.steps_taken
    );
    let csv = dir.join("trajectory.csv");
    write_trajectory_csv(&log, &csv).with_context(|| format!("writing {}", csv.display()))?;
    let json = dir.join("metrics.json");
    write_metrics_json(&log, &json).with_context(|| format!("writing {}", json.display()))?;

    let mut done = Vec::new();
    for snap in snapshots {
        let (k, s) = match *snap {
            Snapshot::First => (0, sc.state.clone()),
            Snapshot::Last => (log.steps_taken, log.final_state.clone()),
            Snapshot::Step(n) if n >= log.steps_taken => {
                warn!("snapshot step {n} is past the end of the run; rendering the last step");
                (log.steps_taken, log.final_state.clone())
            }
            Snapshot::Step(n) => state_at(&sc, n)?,
        };
        if !done.contains(&k) {
            write_snapshot(&dir, &sc.name, k, &s)?;
            done.push(k);
        }
    }

    if let Some(last) = log.last() {
        println!(
            "{}: {} in {} steps, H = {:.6}, H/H_opt = {:.6}, clamps = {}",
            sc.name,
            if log.converged { "converged" } else { "not converged" },
            log.steps_taken,
            last.h,
            if log.h_opt > 0.0 { last.h / log.h_opt } else { 0.0 },
            log.clamp_activations
        );
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UAVCOV_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::OptimalAltitude { scenario } => {
            let sc = match load_scenario(&scenario) {
                Ok(sc) => sc,
                Err(code) => return code,
            };
            let m = &sc.state.model;
            match optimal_altitude(m) {
                Ok(z) => {
                    println!("z_opt = {z:.9}");
                    println!("H_opt = {:.9} ({} nodes)", h_opt(m, sc.state.len()), sc.state.len());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Run {
            scenario,
            snapshots,
            check_gradient,
            out,
            seed,
        } => {
            let snaps = match parse_snapshots(&snapshots) {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            let sc = match load_scenario(&scenario) {
                Ok(sc) => sc,
                Err(code) => return code,
            };
            warn_on_containment(&sc.state);
            match run_command(sc, &snaps, check_gradient, out, seed) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
