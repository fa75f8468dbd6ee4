mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fbpanel", version, about = "Identified sets for binary choice panels with feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `threads`. Defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Random seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Identified set for the coefficient at every configured value.
    Set(Common),
    /// Bounds on the average partial effect.
    Ape(Common),
    /// Independence, sign-moment, feedback-robust moment and Jacobian checks.
    Diagnose(Common),
    /// Point estimates from a two-period panel dataset.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV; overrides `estimate.dataset`.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Draw a panel dataset from the configured model.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of units; overrides `simulate.n`.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Write the joint-law program at one candidate in LP text format.
    ExportLp {
        #[command(flatten)]
        common: Common,
        /// Candidate coefficient; overrides `export_lp.theta_tilde`.
        #[arg(long)]
        theta_tilde: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Set(c) | Command::Ape(c) | Command::Diagnose(c) => c,
            Command::Estimate { common, .. } | Command::Simulate { common, .. } | Command::ExportLp { common, .. } => {
                common
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = RunConfig::load(&common.config)?;
    let threads = common.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
    }
    let ctx = commands::Context {
        out_dir: common.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out")),
        seed: common.seed.or(cfg.seed).unwrap_or(0),
        cfg,
    };
    match &cli.command {
        Command::Set(_) => commands::set(&ctx),
        Command::Ape(_) => commands::ape(&ctx),
        Command::Diagnose(_) => commands::diagnose(&ctx),
        Command::Estimate { data, .. } => commands::estimate(&ctx, data.as_deref()),
        Command::Simulate { n, .. } => commands::simulate(&ctx, *n),
        Command::ExportLp { theta_tilde, .. } => commands::export_lp(&ctx, *theta_tilde),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbpanel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
