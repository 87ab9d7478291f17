use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use radar_lz::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "radar-lz",
    version,
    about = "Universal-learning radar waveform selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seed list, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory, overriding `output_path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Run every scenario x objective x policy combination.
    Sweep(RunArgs),
    /// Render plots from a summary CSV.
    Plot {
        /// summary.csv written by `run` or `sweep`.
        summary: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the default config as TOML.
    DefaultConfig,
}

fn load(args: &RunArgs) -> radar_lz::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.clone();
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    cfg.validate()?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> radar_lz::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, out) = load(&args)?;
            let result = harness::run_experiment(&cfg)?;
            for f in harness::write_outputs(&result, &out)? {
                println!("{}", f.display());
            }
        }
        Command::Sweep(args) => {
            let (cfg, out) = load(&args)?;
            let result = harness::run_sweep(&cfg)?;
            for f in harness::write_outputs(&result, &out)? {
                println!("{}", f.display());
            }
        }
        Command::Plot { summary, out } => {
            let rows = harness::read_summary(&summary)?;
            std::fs::create_dir_all(&out)?;
            for f in harness::emit_plots(&rows, &out)? {
                println!("{}", f.display());
            }
        }
        Command::DefaultConfig => print!("{}", ExperimentConfig::default().to_toml_string()?),
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
