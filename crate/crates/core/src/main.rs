//! Thin command-line front end over the experiment drivers.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use leo_edge::experiments::{run_experiment, ExperimentKind};
use leo_edge::scenario::{load_scenario, Scenario};
use leo_edge::Result;

#[derive(Parser)]
#[command(
    name = "leo-edge",
    version,
    about = "Agile Earth-observation constellations with onboard processing: \
             scheduling, turbulence gating, capacity and episode simulation"
)]
struct Cli {
    /// Scenario file, TOML or JSON; the built-in baseline when absent.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Master seed, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory the result files go to.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Scheduling solver, overriding the scenario's: exact, ga or fifo.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Monte Carlo replicas, overriding the scenario's.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the scenario and print what it resolves to.
    Validate,
    /// Benchmark the scheduling solvers on the contended family.
    Observe,
    /// Measure turbulence gating precision and rescheduling behavior.
    #[command(name = "turbulence-mc")]
    TurbulenceMc,
    /// Report peak load and power curves of the processing pools.
    Capacity,
    /// Simulate the full capture-to-delivery episode.
    Pipeline,
    /// Sweep slot durations over the onboard platforms.
    Sweep,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let mut scenario = match &cli.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::baseline(),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(solver) = &cli.solver {
        scenario.solver = solver.parse()?;
    }
    if let Some(replicas) = cli.replicas {
        scenario.replicas = replicas;
    }
    // Overrides can invalidate a scenario that loaded cleanly.
    scenario.validate_all()?;

    let kind = match cli.command {
        Command::Validate => {
            describe(&scenario)?;
            return Ok(());
        }
        Command::Observe => ExperimentKind::Observe,
        Command::TurbulenceMc => ExperimentKind::TurbulenceMc,
        Command::Capacity => ExperimentKind::Capacity,
        Command::Pipeline => ExperimentKind::Pipeline,
        Command::Sweep => ExperimentKind::Sweep,
    };
    let files = run_experiment(&scenario, kind, scenario.seed, scenario.replicas, &cli.out)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn describe(s: &Scenario) -> Result<()> {
    let stations = s.ground_stations.resolve()?;
    let platform = |p: &Option<leo_edge::scenario::PlatformRef>| -> Result<String> {
        Ok(match p {
            Some(r) => r.resolve()?.name,
            None => "none".into(),
        })
    };
    println!("scenario {}: valid", s.name);
    println!(
        "  constellation: {} satellites at {} km, {} deg inclination",
        s.constellation.n_sats_edge, s.constellation.altitude_e_km, s.constellation.inclination_e_deg
    );
    println!(
        "  {} targets, {} ground stations, horizon {} s in {} s slots",
        s.targets.len(),
        stations.stations.len(),
        s.horizon_s,
        s.t_slot_s
    );
    println!(
        "  edge platform {}, ground platform {}",
        platform(&s.edge_platform)?,
        platform(&s.ground_platform)?
    );
    println!(
        "  solver {}, seed {}, {} replicas",
        s.solver, s.seed, s.replicas
    );
    Ok(())
}
