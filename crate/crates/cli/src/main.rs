//! `minimaxdl`: bounds, proof constructions, and Monte Carlo experiments for
//! dictionary learning, driven by JSON configs.

mod commands;
mod config;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;

#[derive(Parser)]
#[command(
    name = "minimaxdl",
    version,
    about = "Minimax dictionary-learning bounds, proof constructions, and experiments",
    long_about = "Evaluates minimax MSE bounds, builds verified packing codes and dictionary \
ensembles, estimates restricted isometry constants, and runs seeded Monte Carlo experiments.\n\
All numerical outputs are determined by (config, --seed).\n\n\
Sweep CSV schema (fixed column order):\n  point_index, n, snr, learner, trials, mse_mean, \
mse_stderr, thm3_upper, cor1_lower, thm2_lower, master_seed, point_seed, version, error\n\
Empty bound cells mean that bound's hypotheses do not hold at that point."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's master_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (or directory for `ensemble build`); stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit a one-row CSV instead of JSON where applicable
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads (fallback: MINIMAXDL_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write a ready-to-run gnuplot script next to the CSV output
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form bounds or invert them for sample size
    Bounds {
        #[command(subcommand)]
        action: BoundsAction,
    },
    /// Build verified binary packing codes
    Packing {
        #[command(subcommand)]
        action: PackingAction,
    },
    /// Build or re-verify dictionary ensembles
    Ensemble {
        #[command(subcommand)]
        action: EnsembleAction,
    },
    /// Restricted isometry constants
    Rip {
        #[command(subcommand)]
        action: RipAction,
    },
    /// Seeded Monte Carlo experiments
    Simulate {
        #[command(subcommand)]
        action: SimulateAction,
    },
}

#[derive(Subcommand)]
enum BoundsAction {
    /// Evaluate one bound from a config file
    Eval,
    /// Minimal sample size with bound value at or below a target
    SampleSize,
}

#[derive(Subcommand)]
enum PackingAction {
    /// Draw and verify a packing code
    Build,
}

#[derive(Subcommand)]
enum EnsembleAction {
    /// Construct an ensemble and write it to --out
    Build,
    /// Recompute the certificate of an ensemble directory
    Verify {
        /// Ensemble directory (as written by `ensemble build`)
        #[arg(long)]
        dir: PathBuf,
        /// Radius for the neighborhood check; defaults to the stored one
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Subcommand)]
enum RipAction {
    /// Exact or Monte Carlo restricted isometry constant
    Estimate,
}

#[derive(Subcommand)]
enum SimulateAction {
    /// MSE sweep over sample sizes and learners, CSV output
    Mse,
    /// Detection-error experiment with mutual-information budget and Fano floor
    Fano,
}

fn configure_threads(requested: Option<usize>) {
    let from_env = std::env::var("MINIMAXDL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(threads) = requested.or(from_env) {
        if threads > 0 {
            // ignore the error if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Bounds { action } => match action {
            BoundsAction::Eval => {
                commands::bounds_eval(common.config.as_ref(), common.out.as_ref(), common.csv)
            }
            BoundsAction::SampleSize => {
                commands::bounds_sample_size(common.config.as_ref(), common.out.as_ref())
            }
        },
        Command::Packing { action } => match action {
            PackingAction::Build => {
                commands::packing_build(common.config.as_ref(), common.seed, common.out.as_ref())
            }
        },
        Command::Ensemble { action } => match action {
            EnsembleAction::Build => {
                commands::ensemble_build(common.config.as_ref(), common.seed, common.out.as_ref())
            }
            EnsembleAction::Verify { dir, radius } => {
                commands::ensemble_verify(dir, *radius, common.out.as_ref())
            }
        },
        Command::Rip { action } => match action {
            RipAction::Estimate => {
                commands::rip_estimate(common.config.as_ref(), common.seed, common.out.as_ref())
            }
        },
        Command::Simulate { action } => match action {
            SimulateAction::Mse => commands::simulate_mse(
                common.config.as_ref(),
                common.seed,
                common.out.as_ref(),
                common.gnuplot,
            ),
            SimulateAction::Fano => {
                commands::simulate_fano(common.config.as_ref(), common.seed, common.out.as_ref())
            }
        },
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors (unknown subcommand, bad flag)
    let cli = Cli::parse();
    configure_threads(cli.common.threads);
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
