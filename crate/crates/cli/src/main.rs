use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use idealface_cli::commands::{self, CommandOutcome};
use idealface_cli::config::{ExperimentConfig, Overrides};

/// Null-constrained transmit beampattern design on polynomial-ideal faces.
#[derive(Debug, Parser)]
#[command(name = "idealface", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: `output_dir` from the config, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Angular grid step in degrees.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Positive-definiteness floor of the face variable.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Base seed of the snapshot simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Restricted design from the `[design]` section.
    Design,
    /// Sector beam with sixteen nulls against the SDR baseline.
    Example1,
    /// Simple versus repeated null at one blocked direction.
    Example2,
    /// Shift-structured blocking matrix.
    Gsc,
    /// Monte-Carlo comparison of root clustering and root-MUSIC.
    Subspace,
}

fn run(cli: &Cli) -> anyhow::Result<CommandOutcome> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides { grid_step: cli.grid_step, gamma: cli.gamma, seed: cli.seed });
    cfg.validate()?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(match cli.command {
        Command::Design => commands::design(&cfg, &out)?,
        Command::Example1 => commands::example1(&cfg, &out)?.1,
        Command::Example2 => commands::example2(&cfg, &out)?.1,
        Command::Gsc => commands::gsc(&cfg, &out)?,
        Command::Subspace => commands::subspace(&cfg, &out)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            for line in &o.summary {
                println!("{line}");
            }
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.optimal {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: a solve did not reach optimality");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
