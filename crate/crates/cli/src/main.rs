//! `globalgate` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod config;
mod error;

use config::{BpSection, EdSection, EntropySection, ExpressSection, FileConfig, TrainSection};
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "globalgate", version, about = "Global-gate ansatz VQE toolkit")]
struct Cli {
    /// Base seed; instance `i` uses `seed + i`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML config, or a `manifest.json` from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train VQE ensembles over an `h` or `j2` grid.
    Train {
        #[command(flatten)]
        section: TrainSection,
        /// Skip grid points that finished in an earlier run into `--out`.
        #[arg(long)]
        resume: bool,
    },
    /// Expressibility statistics per ansatz.
    Express(ExpressSection),
    /// Gradient-variance scans.
    BpScan(BpSection),
    /// Exact ground energies.
    Ed(EdSection),
    /// Topological entanglement entropy of a `qsv1` state.
    Entropy(EntropySection),
}

/// Global settings after merging flags over the config file.
pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("globalgate-out"))
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.or(file.out),
    };
    match cli.command {
        Command::Train { section, resume } => cmd::train::run(&ctx, section.overlay(file.train.unwrap_or_default()), resume),
        Command::Express(s) => cmd::express::run(&ctx, s.overlay(file.express.unwrap_or_default())),
        Command::BpScan(s) => cmd::bp::run(&ctx, s.overlay(file.bp_scan.unwrap_or_default())),
        Command::Ed(s) => cmd::ed::run(&ctx, s.overlay(file.ed.unwrap_or_default())),
        Command::Entropy(s) => cmd::entropy::run(&ctx, s.overlay(file.entropy.unwrap_or_default())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
