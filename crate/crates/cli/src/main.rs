use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "geim", version, about = "Greedy empirical interpolation: build, analyze, audit, assimilate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `outputs` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Greedy seed; overrides the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the greedy selection and write the artifact and greedy.csv.
    Build(Common),
    /// Compute τ, d, Λ and related sequences for a built artifact.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Artifact to analyze; defaults to `<out>/artifact.json`.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Check every explicit bound against the analysis; exits 1 on any failure.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Enumerate every (N, K, m) window for the product bounds.
        #[arg(long)]
        sweep_theorem: bool,
        /// Analysis report; defaults to `<out>/analysis.json`.
        #[arg(long)]
        analysis: Option<PathBuf>,
    },
    /// Reconstruct a field from measurements with the first n functionals.
    Assimilate {
        #[command(flatten)]
        common: Common,
        /// CSV with a header and the measured value in the last column.
        #[arg(long)]
        measurements: PathBuf,
        /// Number of measurements to use; defaults to all available.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GEIM_THREADS") {
        let n: usize =
            v.trim().parse().with_context(|| format!("GEIM_THREADS must be a positive integer, got {v:?}"))?;
        anyhow::ensure!(n > 0, "GEIM_THREADS must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Build(c) => commands::build(&c).map(|_| true),
        Command::Analyze { common, artifact } => commands::analyze(&common, artifact).map(|_| true),
        Command::Audit { common, sweep_theorem, analysis } => commands::audit(&common, sweep_theorem, analysis),
        Command::Assimilate { common, measurements, n, artifact } => {
            commands::assimilate(&common, &measurements, n, artifact)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
