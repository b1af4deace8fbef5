use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

const RANGE_HELP: &str = "Numeric lists are comma separated; each item is a value or an \
inclusive range start:stop:step (the end point is included within half a step).";

#[derive(Debug, Parser)]
#[command(name = "kinkchain", version, about = "Entanglement of the open XXZ chain with antiparallel boundary fields", after_help = RANGE_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Central-pair concurrence C(L/2, L/2+1) over chain lengths and fields.
    Table1(Table1Args),
    /// Nearest-neighbour concurrence and z-z correlation along the chain.
    Profile(ProfileArgs),
    /// Pair concurrences as functions of the anisotropy.
    Sweep(SweepArgs),
    /// Locate the jump of a pair concurrence in the boundary field.
    Jump(JumpArgs),
    /// Fit C(L) = a0 + a1 exp(-a2 L) to central-pair concurrences.
    Fit(FitArgs),
    /// Global entanglement Q and dQ/dΔ along an anisotropy grid.
    Qscan(QscanArgs),
    /// Analytic critical-field (kink) state concurrence and Q for any L.
    Kink(KinkArgs),
    /// Run a command described by a TOML file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "KINKCHAIN_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Solver {
    /// Residual tolerance of the Lanczos eigensolver.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Matrix-vector product budget per sector.
    #[arg(long, default_value_t = 5000)]
    pub max_matvecs: usize,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub delta: f64,
    /// Boundary fields (list or range).
    #[arg(long)]
    pub h: String,
    /// Even chain lengths (list or range).
    #[arg(long = "L")]
    pub lens: String,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long)]
    pub h: f64,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long)]
    pub h: f64,
    /// Anisotropy grid (list or range, ascending).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    /// Site pair `a,b`; repeatable. Default: (L/2, L/2+1) and (L/2, L/2+2).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct JumpArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long)]
    pub delta: f64,
    /// Field grid (list or range, ascending).
    #[arg(long)]
    pub h: String,
    /// Site pair `a,b`. Default: (L/2, L/2+1).
    #[arg(long)]
    pub pair: Option<String>,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, required_unless_present = "input")]
    pub delta: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Even chain lengths (list or range).
    #[arg(long = "L", required_unless_present = "input")]
    pub lens: Option<String>,
    /// CSV with columns `L` and `concurrence` (and optionally `h`) to fit
    /// instead of computing the series.
    #[arg(long, conflicts_with_all = ["delta", "lens"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct QscanArgs {
    #[arg(long = "L")]
    pub len: usize,
    #[arg(long)]
    pub h: f64,
    /// Anisotropy grid (list or range, ascending, at least 3 points).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct KinkArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long = "L")]
    pub len: usize,
    /// Site pair `a,b`; repeatable. Default: (L/2, L/2+1).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
    /// Twice the magnetization. Default: 0 for even L, 1 for odd L.
    #[arg(long = "two-m", allow_hyphen_values = true)]
    pub two_m: Option<i64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with `command = "<name>"` and an `[args]` table.
    pub config: PathBuf,
}
