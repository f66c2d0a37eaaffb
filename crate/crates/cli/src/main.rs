//! `fpt`: run first-passage tracking experiments and print the constants they
//! are compared against.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{List, OffsetRule};

#[derive(Debug, Parser)]
#[command(
    name = "fpt",
    version,
    about = "First-passage time tracking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Noisy observations: E|eta - tau|^p / c1 over a level sweep for the
    /// sequential mmse, single-observation and fixed-time rules.
    Noisy(NoisyArgs),
    /// Delayed observations: E|eta - tau|^p / c2 over a delay sweep.
    Delayed(DelayedArgs),
    /// Print closed-form constants and bounds.
    Constants(ConstantsArgs),
    /// Tail bounds of the passage time next to empirical tail frequencies.
    Bounds(BoundsArgs),
    /// Growth of the empirical error moment of a driftless walk.
    Diverge(DivergeArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file with defaults for any long flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (falls back to $FPT_SEED, then 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV; a `<out>.meta` file with the resolved settings is written
    /// next to it. Standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoisyArgs {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Exponent of the single-observation rule, in (1/2, 1)
    #[arg(long)]
    pub q: Option<f64>,
    /// Comma-separated levels
    #[arg(long)]
    pub levels: Option<List<f64>>,
    /// Target precision; sets the trial count per estimator
    #[arg(long)]
    pub delta: Option<f64>,
    /// Explicit trial count, overriding --delta
    #[arg(long)]
    pub n: Option<u64>,
    /// Horizon cap in steps
    #[arg(long)]
    pub cap: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DelayedArgs {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated delays
    #[arg(long)]
    pub delays: Option<List<u64>>,
    /// Fixed level for every delay
    #[arg(long, conflicts_with = "ell_rule")]
    pub ell: Option<f64>,
    /// Level as a function of the delay, `<base>+sd`
    #[arg(long)]
    pub ell_rule: Option<OffsetRule>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Horizon cap in steps; required when s = 0
    #[arg(long)]
    pub cap: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Noisy-observation constant c1(ell, s, eps, p)
    #[arg(long)]
    pub c1: bool,
    /// Delayed-observation constant c2(d, s, p); d^p when s = 0
    #[arg(long)]
    pub c2: bool,
    /// Fixed-time limit ratio ((1 + eps^2)/eps^2)^(p/2)
    #[arg(long)]
    pub ft_ratio: bool,
    /// E|N|^p
    #[arg(long)]
    pub gauss_moment: bool,
    /// Bound on P(tau < ell/s - z)
    #[arg(long)]
    pub tail_lower: bool,
    /// Bound on P(tau > ell/s + z)
    #[arg(long)]
    pub tail_upper: bool,
    /// Explicit bound on E|tau - ell/s|^p
    #[arg(long)]
    pub moment_bound: bool,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Comma-separated deviations z, each below ell/s
    #[arg(long)]
    pub z: Option<List<f64>>,
    #[arg(long)]
    pub n: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DivergeArgs {
    #[arg(long)]
    pub ell: Option<f64>,
    /// Drift; must be 0
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Horizon cap in steps (mandatory)
    #[arg(long)]
    pub cap: Option<u64>,
    /// Comma-separated sample sizes
    #[arg(long)]
    pub n_grid: Option<List<u64>>,
    #[command(flatten)]
    pub common: Common,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Noisy(args) => commands::noisy(args),
        Command::Delayed(args) => commands::delayed(args),
        Command::Constants(args) => commands::constants(args),
        Command::Bounds(args) => commands::bounds(args),
        Command::Diverge(args) => commands::diverge(args),
    };
    if let Err(err) = result {
        eprintln!("fpt: {err}");
        std::process::exit(err.exit_code());
    }
}
