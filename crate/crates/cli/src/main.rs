//! `pinney`: damped Pinney equation workbench.
//!
//! Subcommands: `simulate` (trajectory runs with collapse detection),
//! `compare` (asymptotic-vs-numeric error reports and envelope data),
//! `kostin` (dissipative wave-packet width, density, and velocity fields),
//! and `transform-check` (coordinate-transformation residual reports).
//!
//! Every run is deterministic: the same invocation produces byte-identical
//! output files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 1 validation error, 2 numerical failure,
/// 3 unexpected collapse.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn unexpected_collapse(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }
}

impl From<pinney_core::Error> for CliError {
    fn from(err: pinney_core::Error) -> Self {
        match err {
            pinney_core::Error::StepFailure { .. } => CliError::numerical(err.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::validation(format!("io error: {err}"))
    }
}

#[derive(Parser)]
#[command(name = "pinney", version, about = "Damped Pinney equation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the damped Pinney or classical oscillator equation.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Compare the zeroth-order closed form against direct integration.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Evolve a Gaussian wave packet and emit its fields.
    #[command(allow_negative_numbers = true)]
    Kostin(KostinArgs),
    /// Verify a coordinate transformation as a numerical residual.
    #[command(allow_negative_numbers = true)]
    TransformCheck(TransformCheckArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Flat key-value JSON configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Free-form scenario label copied into reports.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Args)]
pub struct ProfileArgs {
    /// Frequency profile: constant | decaying | growing | oscillating |
    /// tabulated:<csv-path>.
    #[arg(long)]
    pub omega: Option<String>,
    /// Reference frequency Omega0 (analytic profiles).
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Modulation depth of the oscillating profile, in (0, 1).
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Which equation to integrate: pinney | classical.
    #[arg(long)]
    pub system: Option<String>,
    /// Nonlinearity constant k.
    #[arg(long)]
    pub k: Option<f64>,
    /// Damping coefficient (also the slow-time scale).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial position.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Initial velocity.
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of output samples (rows of the trajectory CSV).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Collapse threshold for the event detector.
    #[arg(long)]
    pub collapse_delta: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Reference amplitude of the zeroth-order solution.
    #[arg(long = "A0", alias = "a0")]
    pub a0: Option<f64>,
    /// Constant phase offset.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also extract the envelope midline of the numeric run.
    #[arg(long)]
    pub envelope: bool,
    /// Comma-separated damping values for a convergence study.
    #[arg(long)]
    pub eps_list: Option<String>,
}

#[derive(Args)]
pub struct KostinArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Width initial data, asymptotic form.
    #[arg(long = "A0", alias = "a0")]
    pub a0: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// Phase-integral reference time of the width closed form.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Width initial data, state form.
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub xdot0: Option<f64>,
    /// Packet-center initial position.
    #[arg(long)]
    pub qcl0: Option<f64>,
    /// Packet-center initial velocity.
    #[arg(long = "qcl-dot0")]
    pub qcl_dot0: Option<f64>,
    /// Width evolution: numeric | asymptotic | both.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of spatial grid points of the emitted fields.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub q_min: Option<f64>,
    #[arg(long)]
    pub q_max: Option<f64>,
}

#[derive(Args)]
pub struct TransformCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Which transformation to verify: quasi-invariance | emden-fowler |
    /// abel | mass.
    #[arg(long)]
    pub transform: Option<String>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    /// Auxiliary-equation constant W (quasi-invariance).
    #[arg(long)]
    pub w: Option<f64>,
    /// Auxiliary function initial value.
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Auxiliary function initial slope.
    #[arg(long)]
    pub rho_dot0: Option<f64>,
    /// Exponential mass rate (mass transform): m = exp(rate * t).
    #[arg(long)]
    pub mass_rate: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also measure the residual at N-times denser sampling and report the
    /// refinement ratio.
    #[arg(long)]
    pub refine: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Compare(args) => commands::compare::run(&args),
        Command::Kostin(args) => commands::kostin::run(&args),
        Command::TransformCheck(args) => commands::transform_check::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
