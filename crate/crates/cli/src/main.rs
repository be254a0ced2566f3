use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ergm_cli::{run, Command, RunConfig};

/// Exponential random graph models: simulation, classical and Bayesian fits.
#[derive(Parser)]
#[command(name = "ergm", version)]
struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Run the graph sampler and record the statistics trace.
    Simulate,
    /// Maximum pseudolikelihood fit.
    Mple,
    /// Monte Carlo MLE around theta0 (default: the MPLE).
    Mcmle,
    /// Single-site exchange sampler.
    Exchange,
    /// Population exchange sampler with ADS moves.
    PopExchange,
    /// Bayesian goodness of fit from a draws CSV.
    Gof,
    /// Write the bundled networks and report on the others.
    FetchData,
    /// Summaries and autocorrelations of a draws CSV.
    Summarize,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Simulate => Command::Simulate,
            Sub::Mple => Command::Mple,
            Sub::Mcmle => Command::Mcmle,
            Sub::Exchange => Command::Exchange,
            Sub::PopExchange => Command::PopExchange,
            Sub::Gof => Command::Gof,
            Sub::FetchData => Command::FetchData,
            Sub::Summarize => Command::Summarize,
        }
    }
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    if let Some(out) = &cli.out {
        cfg.set("out", out.display());
    }
    let command = Command::from(cli.command);
    let report = run(command, &cfg).with_context(|| format!("ergm {command}"))?;
    for note in &report.notes {
        println!("{note}");
    }
    for file in &report.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}
