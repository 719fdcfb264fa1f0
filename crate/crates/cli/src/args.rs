use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "trivortex", version, about = "Three point vortices with zero total angular impulse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one start and write the trajectory and a run summary.
    Simulate(SimulateArgs),
    /// Sample the critical curve.
    Curve(CurveArgs),
    /// Print the critical points as JSON.
    Points(StrengthArgs),
    /// Recompute the four tabulated starts and compare.
    Table1(Table1Args),
    /// Run the formulation cross-checks and invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Clone, Copy)]
pub struct StrengthArgs {
    #[arg(long, default_value_t = 2.0)]
    pub k1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k2: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("start").required(true).args(["sides", "ibar", "on_curve_x1", "preset"])))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub strengths: StrengthArgs,

    /// Triangle sides `R1,R2,R3`, rescaled to unit perimeter.
    #[arg(long = "R", value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub sides: Option<Vec<f64>>,

    /// Start at this value of the invariant, offset from the critical curve by `--caly`.
    #[arg(long)]
    pub ibar: Option<f64>,

    #[arg(long, requires = "ibar", default_value_t = 0.0, allow_negative_numbers = true)]
    pub caly: f64,

    /// Start on the critical curve at this `x1`.
    #[arg(long)]
    pub on_curve_x1: Option<f64>,

    /// One of the tabulated starts: r-, r+, u-, u+.
    #[arg(long)]
    pub preset: Option<String>,

    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub gamma: i8,

    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,

    #[arg(long)]
    pub rel_tol: Option<f64>,

    #[arg(long)]
    pub abs_tol: Option<f64>,

    /// Convergence threshold on `|calY|`.
    #[arg(long, default_value_t = trivortex::classify::DEFAULT_TOL_CONV)]
    pub tol_conv: f64,

    /// Trajectory CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Run summary JSON; printed to stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,

    /// Resample the trajectory to this many uniformly spaced rows.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub strengths: StrengthArgs,

    #[arg(long, default_value_t = 512)]
    pub samples: usize,

    /// Written to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 500.0)]
    pub t_max: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 500.0)]
    pub t_max: f64,
}
