//! `alaam` — estimate, simulate, and test autologistic actor attribute
//! models from the command line.
//!
//! Every subcommand merges its flags over an optional `--config` file
//! (flat `key = value`, flags win), writes its effective settings as
//! `manifest_<subcommand>.txt` into `--out-dir`, and exits with:
//! 0 success, 1 usage error, 2 data error, 3 non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod errors;
mod inputs;
mod reports;

/// Dataset flags shared by the model-driven subcommands.
#[derive(Args)]
pub struct DataArgs {
    /// Network edge-list file
    #[arg(long)]
    pub network: Option<String>,

    /// Network kind: undirected, directed, or bipartite
    #[arg(long)]
    pub kind: Option<String>,

    /// Attribute files as comma-separated kind:path entries
    /// (e.g. "binary:sport.txt,continuous:alcohol.txt")
    #[arg(long)]
    pub attrs: Option<String>,

    /// Effect list (e.g. "Density,Contagion,oOc:alcohol")
    #[arg(long)]
    pub model: Option<String>,
}

/// Output and config flags shared by every subcommand.
#[derive(Args)]
pub struct OutArgs {
    /// Output directory (created if missing)
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,

    /// Flat "key = value" config file; command-line flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct EstimateSaArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Observed outcome file
    #[arg(long)]
    pub outcome: Option<String>,

    /// Snowball zone file; outermost-zone outcomes are held fixed
    #[arg(long)]
    pub zones: Option<String>,

    /// Starting parameters, comma-separated in model order
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<String>,

    /// RNG seed (required: every run is reproducible)
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct EstimateEeArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Observed outcome file
    #[arg(long)]
    pub outcome: Option<String>,

    /// Snowball zone file; outermost-zone outcomes are held fixed
    #[arg(long)]
    pub zones: Option<String>,

    /// Total number of independent runs
    #[arg(long)]
    pub runs: Option<usize>,

    /// Execute only this run (0-based); lets an external launcher run
    /// many processes in parallel against the same --out-dir
    #[arg(long = "run-index")]
    pub run_index: Option<usize>,

    /// Iterations (parameter updates) per run
    #[arg(long)]
    pub mee: Option<usize>,

    /// Sampler proposals per iteration
    #[arg(long)]
    pub ms: Option<usize>,

    /// Learning rate of the update rule
    #[arg(long)]
    pub r: Option<f64>,

    /// Floor on the update magnitude
    #[arg(long)]
    pub floor: Option<f64>,

    /// Iterations discarded before summarizing each trace
    #[arg(long)]
    pub burnin: Option<usize>,

    /// Trace thinning stride after the burn-in
    #[arg(long)]
    pub thin: Option<usize>,

    /// Initialization updates before the chain starts
    #[arg(long = "init-steps")]
    pub init_steps: Option<usize>,

    /// RNG seed; run k uses a stream derived from (seed, k)
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct PoolArgs {
    /// Iterations discarded from each trace before summarizing
    #[arg(long)]
    pub burnin: Option<usize>,

    /// Trace thinning stride after the burn-in
    #[arg(long)]
    pub thin: Option<usize>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Parameters to simulate at, comma-separated in model order
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,

    /// Starting outcome file; when given, the observed statistics are
    /// also compared to the simulated 95% band (degeneracy check)
    #[arg(long)]
    pub outcome: Option<String>,

    /// Snowball zone file (only with --outcome)
    #[arg(long)]
    pub zones: Option<String>,

    /// Retained samples [default: 100]
    #[arg(long)]
    pub samples: Option<usize>,

    /// Proposals before the first sample [default: 1000 per node]
    #[arg(long)]
    pub burnin: Option<u64>,

    /// Proposals between samples [default: 10 per node]
    #[arg(long)]
    pub interval: Option<u64>,

    /// RNG seed (required: every run is reproducible)
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct GofArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Observed outcome file
    #[arg(long)]
    pub outcome: Option<String>,

    /// Snowball zone file; outermost-zone outcomes are held fixed
    #[arg(long)]
    pub zones: Option<String>,

    /// Fitted parameters, comma-separated in model order
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,

    /// Extra statistics to test without fitting them, as a
    /// comma-separated effect list
    #[arg(long)]
    pub extra: Option<String>,

    /// |t| limit for effects outside the model [default: 2.0]
    #[arg(long = "out-threshold")]
    pub out_threshold: Option<f64>,

    /// Simulated samples [default: 100]
    #[arg(long)]
    pub samples: Option<usize>,

    /// Proposals before the first sample [default: 1000 per node]
    #[arg(long)]
    pub burnin: Option<u64>,

    /// Proposals between samples [default: 10 per node]
    #[arg(long)]
    pub interval: Option<u64>,

    /// RNG seed (required: every run is reproducible)
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct StudyArgs {
    /// Outcome vectors to simulate and fit per arm [default: 20]
    #[arg(long)]
    pub samples: Option<usize>,

    /// Runs per sample when the estimator is ee [default: 20]
    #[arg(long)]
    pub runs: Option<usize>,

    /// Master RNG seed for the whole study
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a model by three-phase stochastic approximation
    EstimateSa(EstimateSaArgs),
    /// Fit a model by independent equilibrium-expectation runs
    EstimateEe(EstimateEeArgs),
    /// Pool equilibrium runs from --out-dir into one estimate
    Pool(PoolArgs),
    /// Simulate outcome statistics at fixed parameters
    Simulate(SimulateArgs),
    /// Goodness-of-fit t-ratios at fitted parameters
    Gof(GofArgs),
    /// Bias/coverage/error-rate simulation study from a config file
    Study(StudyArgs),
}

#[derive(Parser)]
#[command(
    name = "alaam",
    version,
    about = "Estimate, simulate, and test autologistic actor attribute models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and succeed; actual
            // parse errors go to stderr and exit as usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::EstimateSa(args) => commands::estimate_sa_cmd(args),
        Cmd::EstimateEe(args) => commands::estimate_ee_cmd(args),
        Cmd::Pool(args) => commands::pool_cmd(args),
        Cmd::Simulate(args) => commands::simulate_cmd(args),
        Cmd::Gof(args) => commands::gof_cmd(args),
        Cmd::Study(args) => commands::study_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alaam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
