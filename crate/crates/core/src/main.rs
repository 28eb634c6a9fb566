use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavauth::experiments::{cmd_estimate_demo, cmd_roc, cmd_sweep, cmd_threshold};
use uavauth::scenario::{Scenario, SweepVar};
use uavauth::{Error, Result};

#[derive(Parser)]
#[command(name = "uavauth", version, about = "GLLR physical-layer authentication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (defaults apply when omitted).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per hypothesis.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Neyman–Pearson thresholds for the scenario's eta list.
    Threshold(Common),
    /// Analytic and empirical FAR/SDR over a threshold grid.
    Roc(Common),
    /// SDR at fixed FAR along a parameter sweep.
    Sweep {
        /// theta1, phi1, lambda1_sq or p1 (overrides sweep.var).
        #[arg(long = "var")]
        var: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// True vs estimated attacker parameters for one packet, as JSON.
    EstimateDemo(Common),
}

fn load(c: &Common) -> Result<Scenario> {
    let mut sc = match &c.scenario {
        Some(p) => Scenario::from_file(p).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Usage(format!("{}:{line}: {msg}", p.display())),
            other => other,
        })?,
        None => Scenario::default(),
    };
    if let Some(s) = c.seed {
        sc.seed = s;
    }
    if let Some(t) = c.trials {
        sc.trials = t;
        sc.h0_trials = None;
    }
    if let Some(g) = c.grid_step {
        sc.grid_step = g;
    }
    sc.validate()?;
    Ok(sc)
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Threshold(c) | Command::Roc(c) | Command::EstimateDemo(c) => c,
        Command::Sweep { common, .. } => common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    let sc = load(common)?;
    let text = match &cli.command {
        Command::Threshold(_) => cmd_threshold(&sc)?,
        Command::Roc(_) => cmd_roc(&sc)?,
        Command::EstimateDemo(_) => cmd_estimate_demo(&sc)?,
        Command::Sweep { var, .. } => {
            let var = match var {
                Some(v) => Some(SweepVar::parse(v).ok_or_else(|| {
                    Error::Usage(format!("unknown sweep variable `{v}` (theta1, phi1, lambda1_sq, p1)"))
                })?),
                None => None,
            };
            cmd_sweep(&sc, var)?
        }
    };
    match &common.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
