use clap::{Parser, Subcommand};
use junctionflow::cli::{cmd_run, cmd_search, cmd_suite, ConfigError, ExitCode, RunConfig, ScenarioKind};
use std::path::PathBuf;
use std::process::exit;

/// Wavefront-tracking solver and inflow-control toolkit for concave scalar
/// conservation laws on a 1-1 road network.
#[derive(Parser)]
#[command(name = "junctionflow", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a scenario from a config file and export CSV artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rarefaction discretization step (overrides the config).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Scenario name (overrides the config).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run a randomized property suite.
    Suite {
        /// One of: maximality, monotone, bvbound, conservation.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Search for a minimum-variation control per the config's [search] block.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(
    path: &PathBuf,
    out: Option<PathBuf>,
    delta: Option<f64>,
    seed: Option<u64>,
    scenario: Option<String>,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    if let Some(delta) = delta {
        cfg.delta = delta;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
        if let Some(search) = &mut cfg.search {
            search.seed = seed;
        }
    }
    if let Some(name) = scenario {
        cfg.scenario = ScenarioKind::parse(&name).ok_or(ConfigError::Invalid {
            section: "run".into(),
            key: "scenario".into(),
            msg: format!("unknown scenario '{name}'"),
        })?;
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, out, delta, seed, scenario } => match load(&config, out, delta, seed, scenario) {
            Ok(cfg) => cmd_run(&cfg),
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::ConfigError
            }
        },
        Cmd::Suite { suite, seed, count } => cmd_suite(&suite, seed, count),
        Cmd::Search { config, out, delta, seed } => match load(&config, out, delta, seed, None) {
            Ok(cfg) => cmd_search(&cfg),
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::ConfigError
            }
        },
    };
    exit(code.code());
}
