use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdkin::config;
use fdkin::pipeline;

/// Fractional-order derivative kinematics for online handwriting:
/// synthesize cohorts, extract features, and run the correlation and
/// classification analyses.
#[derive(Parser)]
#[command(name = "fdkin", version, about)]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed from the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (1 = fully sequential). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic cohort (SVC files plus subjects.csv).
    Synth,
    /// Extract feature CSVs from a cohort directory.
    Extract,
    /// Correlation reports (full and top-5) per approach.
    Correlate,
    /// Randomized-search classification report over the feature CSVs.
    Classify,
    /// Fractional derivative of a single-column numeric CSV.
    Fd {
        /// Input file, one number per line.
        input: PathBuf,
        /// Derivative order in (0, 1].
        #[arg(long)]
        alpha: f64,
        /// GL, RL or C.
        #[arg(long)]
        approach: String,
        /// Grid step h in seconds.
        #[arg(long)]
        step: f64,
        /// Output file (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evaluate one feature statistic over the alpha grid for one subject.
    Sweep {
        #[arg(long)]
        subject: String,
        /// Kinematic base, e.g. horizontal_velocity.
        #[arg(long)]
        base: String,
        /// mean or relstd.
        #[arg(long)]
        stat: String,
        /// Output file (default: <output_dir>/sweep_<subject>_<base>_<stat>.csv).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<config::PipelineConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("this command needs --config <file>"))?;
    config::load(path, cli.seed)
}

fn run(cli: &Cli) -> anyhow::Result<pipeline::CmdOutcome> {
    match &cli.command {
        Command::Synth => pipeline::cmd_synth(&load_config(cli)?),
        Command::Extract => pipeline::cmd_extract(&load_config(cli)?, cli.jobs),
        Command::Correlate => pipeline::cmd_correlate(&load_config(cli)?),
        Command::Classify => pipeline::cmd_classify(&load_config(cli)?, cli.jobs),
        Command::Fd { input, alpha, approach, step, output } => {
            pipeline::cmd_fd(input, output.as_deref(), *alpha, approach, *step)
        }
        Command::Sweep { subject, base, stat, output } => {
            pipeline::cmd_sweep(&load_config(cli)?, subject, base, stat, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
