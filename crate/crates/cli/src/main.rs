//! Deterministic command-line front end for the RRDPS toolkit: phase-error
//! bound tabulation, optimized key-rate sweeps, Monte Carlo simulation, and
//! the cross-verification suite.
//!
//! Exit codes: 0 on success, 1 on runtime failure or a failed verification,
//! 2 on usage errors (including out-of-range parameter values).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Error classes mapped to exit codes: usage errors exit 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rrdps::Error> for CliError {
    fn from(err: rrdps::Error) -> Self {
        match err {
            // Out-of-range parameter values are usage errors per the CLI's
            // exit-code contract.
            rrdps::Error::Domain(_) => CliError::Usage(err.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rrdps",
    version,
    about = "Security-bound curves, key-rate sweeps, simulation, and \
             cross-verification for round-robin DPS QKD"
)]
struct Cli {
    /// TOML config file with one table per subcommand; flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the phase-error bound F(nu, e) as CSV
    Bounds(BoundsArgs),
    /// Optimize the key rate across transmissions and tabulate it as CSV
    Keyrate(KeyrateArgs),
    /// Run the Monte Carlo simulator and report statistics as JSON
    Simulate(SimulateArgs),
    /// Run the cross-verification checks and report them as JSON
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Pulses per block [default: 6]
    #[arg(long = "L", value_name = "N")]
    pub l: Option<usize>,

    /// Tabulate a single photon number instead of sweeping 1..=nu-max
    #[arg(long, conflicts_with = "nu_max")]
    pub nu: Option<usize>,

    /// Upper end of the photon-number sweep [default: L-2]
    #[arg(long)]
    pub nu_max: Option<usize>,

    /// Tabulate a single bit-error rate instead of the error grid
    #[arg(long, conflicts_with_all = ["e_max", "e_points"])]
    pub e: Option<f64>,

    /// Upper end of the error grid starting at 0 [default: 0.5]
    #[arg(long)]
    pub e_max: Option<f64>,

    /// Number of points in the error grid [default: 101]
    #[arg(long)]
    pub e_points: Option<usize>,

    /// Write CSV here plus a sibling <FILE>.manifest.json [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KeyrateArgs {
    /// Pulses per block [default: 6]
    #[arg(long = "L", value_name = "N")]
    pub l: Option<usize>,

    /// Observed bit-error rate [default: 0.03]
    #[arg(long)]
    pub e: Option<f64>,

    /// Error-correction inefficiency [default: 1.1]
    #[arg(long)]
    pub f_ec: Option<f64>,

    /// Optimize at a single transmission instead of the grid
    #[arg(long, conflicts_with_all = ["eta_min", "eta_max", "eta_points"])]
    pub eta: Option<f64>,

    /// Lower end of the logarithmic transmission grid [default: 0.001]
    #[arg(long)]
    pub eta_min: Option<f64>,

    /// Upper end of the transmission grid [default: 1.0]
    #[arg(long)]
    pub eta_max: Option<f64>,

    /// Number of points in the transmission grid [default: 21]
    #[arg(long)]
    pub eta_points: Option<usize>,

    /// Smallest photon-number threshold to search [default: 1]
    #[arg(long)]
    pub nu_th_min: Option<usize>,

    /// Largest photon-number threshold to search [default: L-2]
    #[arg(long)]
    pub nu_th_max: Option<usize>,

    /// Lower end of the intensity search window [default: 0.001]
    #[arg(long)]
    pub mu_min: Option<f64>,

    /// Upper end of the intensity search window [default: 2.0]
    #[arg(long)]
    pub mu_max: Option<f64>,

    /// Convergence tolerance of the intensity refinement [default: 1e-6]
    #[arg(long)]
    pub refine_tol: Option<f64>,

    /// Emit only rows with disturbance monitoring
    #[arg(long, conflicts_with = "unmonitored")]
    pub monitored: bool,

    /// Emit only rows with the fixed phase-error ceiling
    #[arg(long)]
    pub unmonitored: bool,

    /// Write CSV here plus a sibling <FILE>.manifest.json [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Pulses per block [default: 6]
    #[arg(long = "L", value_name = "N")]
    pub l: Option<usize>,

    /// Photon-number tagging threshold [default: 1]
    #[arg(long)]
    pub nu_th: Option<usize>,

    /// Mean photon number per pulse [default: 0.05]
    #[arg(long)]
    pub mu: Option<f64>,

    /// Channel transmission [default: 1.0]
    #[arg(long)]
    pub eta: Option<f64>,

    /// Number of blocks to simulate [default: 100000]
    #[arg(long)]
    pub rounds: Option<u64>,

    /// Seed of the round-indexed random streams [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Fraction of detections diverted to error estimation [default: 0.1]
    #[arg(long)]
    pub sample_fraction: Option<f64>,

    /// Disturbance model: ideal, phase_flip:<p>, or position_dephase:<d>
    /// [default: ideal]
    #[arg(long, value_name = "MODEL")]
    pub channel: Option<String>,

    /// Write JSON here [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Verification depth: fast or full [default: fast]
    #[arg(long, value_name = "LEVEL")]
    pub level: Option<String>,

    /// Fault-injection offset added to one closed-form eigenvalue target;
    /// any nonzero value must make verification fail
    #[arg(long, hide = true)]
    pub perturb_omega_minus: Option<f64>,

    /// Write JSON here [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bounds(args) => commands::bounds(cli.config.as_deref(), args),
        Command::Keyrate(args) => commands::keyrate(cli.config.as_deref(), args),
        Command::Simulate(args) => commands::simulate(cli.config.as_deref(), args),
        Command::Verify(args) => commands::verify(cli.config.as_deref(), args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
