use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use atomexact::experiments::{self, ExperimentConfig, Mechanism};
use atomexact::Error;
use clap::{Parser, Subcommand};

/// Exact sampling from exponential mechanisms.
#[derive(Parser, Debug)]
#[command(name = "atomexact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for figure files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print run counters as a JSON line after the released value.
    #[arg(long, global = true)]
    stats: bool,

    /// Select the regeneration indicator with the Bernoulli factory.
    #[arg(long, global = true)]
    factory: bool,

    /// Pad the remainder loops to a data-independent count.
    #[arg(long, global = true)]
    pad: bool,

    /// Override a config key, e.g. `--set n=30,100`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Release one value from the configured mechanism.
    Sample,
    /// Print (ε, δ) reports of MCMC releases as JSON lines.
    Audit,
    /// δ cost against chain length.
    Fig1,
    /// Distribution of realised proposal counts.
    Fig2,
    /// Utility of the discrete mechanism.
    Fig3,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.stats |= cli.stats;
    cfg.factory |= cli.factory;
    cfg.pad |= cli.pad;
    if cfg.pad && cfg.mechanism == Mechanism::Mcmc {
        return Err(Error::Config("padding applies to the exact samplers, not mcmc".into()));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load(cli)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if cli.print_config {
        out.write_all(cfg.to_text().as_bytes())?;
        return Ok(());
    }
    let written = match cli.command {
        Command::Sample => return experiments::run_sample(&cfg, &mut out),
        Command::Audit => return experiments::run_audit(&cfg, &mut out),
        Command::Fig1 => experiments::run_fig1(&cfg)?,
        Command::Fig2 => experiments::run_fig2(&cfg)?,
        Command::Fig3 => experiments::run_fig3(&cfg)?,
    };
    eprintln!("wrote {} and {}", written.0.display(), written.1.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("atomexact: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
