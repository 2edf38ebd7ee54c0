use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use airfeel::experiment::{self, Command, ExperimentConfig, Format};

/// Broadband analog aggregation experiments.
///
/// Every command writes its tables and a `manifest.json` (config hash, seed,
/// version) into the output directory. The same config and seed always
/// produce byte-identical files.
#[derive(Debug, Parser)]
#[command(name = "airfeel", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo repetitions; overrides the config.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output directory (default: config `output_dir`, else `out/<command>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// SNR-truncation and reliability-quantity curves.
    Tradeoff,
    /// Simulation checks of the topology and SNR statistics.
    Montecarlo,
    /// Analog and digital latency sweeps.
    Latency,
    /// One federated training run.
    Train,
    /// Aggregation and scheduling comparisons and the interior-radius grid.
    Compare,
    /// Spread-spectrum suppression and beamforming reports.
    Extensions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Tradeoff => Command::Tradeoff,
            Cmd::Montecarlo => Command::MonteCarlo,
            Cmd::Latency => Command::Latency,
            Cmd::Train => Command::Train,
            Cmd::Compare => Command::Compare,
            Cmd::Extensions => Command::Extensions,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    let command = Command::from(cli.command);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(command.name()));
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    match experiment::run(command, &cfg, &out, format) {
        Ok(manifest) => {
            for f in &manifest.files {
                println!("{}\t{} rows", out.join(&f.name).display(), f.rows);
            }
            println!("{}", out.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
