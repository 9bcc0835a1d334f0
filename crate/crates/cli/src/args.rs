//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lcusim::integrals::Orthogonalization;
use lcusim::taylor::Mode;

#[derive(Debug, Parser)]
#[command(name = "lcusim", version, about = "Truncated-Taylor LCU simulation of molecular Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a geometry into a spin-orbital integral table.
    Build(BuildArgs),
    /// Evolve a seeded random state and compare with the exact propagator.
    Simulate(SimulateArgs),
    /// Tabulate cost and error over epsilon or grid spacing.
    Sweep(SweepArgs),
    /// Run the cross-oracle self-check suite.
    Verify(VerifyArgs),
}

impl Command {
    pub fn workers(&self) -> usize {
        self.exec().workers
    }

    pub fn report_path(&self) -> Option<&Path> {
        self.exec().report.as_deref()
    }

    fn exec(&self) -> &ExecArgs {
        match self {
            Command::Build(a) => &a.exec,
            Command::Simulate(a) => &a.exec,
            Command::Sweep(a) => &a.exec,
            Command::Verify(a) => &a.exec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Database,
    Onthefly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Operator,
    Circuit,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Operator => Mode::Operator,
            ModeArg::Circuit => Mode::Circuit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrthoArg {
    Lowdin,
    None,
}

impl From<OrthoArg> for Orthogonalization {
    fn from(o: OrthoArg) -> Self {
        match o {
            OrthoArg::Lowdin => Orthogonalization::Lowdin,
            OrthoArg::None => Orthogonalization::None,
        }
    }
}

/// Worker count and report destination; neither enters the report.
#[derive(Debug, Clone, Args)]
pub struct ExecArgs {
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Report file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Geometry and basis file.
    #[arg(long, value_name = "FILE", required_unless_present = "table", conflicts_with = "table")]
    pub geometry: Option<PathBuf>,
    /// Spin-orbital integral table, as written by `build`.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OrthoArg::Lowdin)]
    pub orthogonalization: OrthoArg,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Box half-width in bohr.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Grid spacing in bohr.
    #[arg(long)]
    pub delta_x: Option<f64>,
    /// Constant `c` in `ζ = c ε / (Γ 𝒱 t)`.
    #[arg(long, default_value_t = 1.0)]
    pub zeta_const: f64,
    /// Constant `c1` in `x_max = c1 ln(N t / ε)` when no box is given.
    #[arg(long, default_value_t = 1.0)]
    pub grid_c1: f64,
    /// Multiplier of the error-bound spacing when no spacing is given.
    #[arg(long, default_value_t = 1.0)]
    pub grid_c2: f64,
}

/// Database refinement overrides; defaults depend on the command.
#[derive(Debug, Clone, Args)]
pub struct DatabaseArgs {
    /// Stop once successive extrapolations differ by less than a tenth of this.
    #[arg(long)]
    pub db_tolerance: Option<f64>,
    /// Halvings after the base grid.
    #[arg(long)]
    pub db_refinements: Option<usize>,
    /// Leading error order removed by extrapolation.
    #[arg(long)]
    pub db_order: Option<f64>,
    /// Spacing between removed error orders.
    #[arg(long)]
    pub db_step: Option<f64>,
    /// Number of error orders removed.
    #[arg(long)]
    pub db_depth: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long, value_name = "FILE")]
    pub geometry: PathBuf,
    /// Integral table to write.
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = OrthoArg::Lowdin)]
    pub orthogonalization: OrthoArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub db: DatabaseArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Evolution time in atomic units.
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Algorithm::Database)]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value_t = ModeArg::Operator)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub db: DatabaseArgs,
    /// Seed of the random initial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refuse plans with more segments than this.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_segments: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Report the plan and cost without evolving.
    #[arg(long)]
    pub plan_only: bool,
    /// Also compare with the exact evolution under this table.
    #[arg(long, value_name = "FILE")]
    pub reference_table: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Epsilon values, one row each.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "delta_xs", required_unless_present = "delta_xs")]
    pub epsilons: Vec<f64>,
    /// Grid spacings, one row each; needs a geometry.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub delta_xs: Vec<f64>,
    /// Also write the rows as a whitespace-separated table.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per randomized check.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
    #[command(flatten)]
    pub exec: ExecArgs,
}
