use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lfr_stoch::scenario::{GridOverrides, ToleranceOverrides};
use lfr_stoch::{GridMode, Relation, SystemKind};

#[derive(Debug, Parser)]
#[command(name = "lfr-stoch", version, about = "Stochastic orders of series and parallel LFR systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether system A is smaller than system B in one order.
    Compare(CompareArgs),
    /// Run the built-in example/counterexample matrix and write all curves.
    Regress(RegressArgs),
    /// Search a parameter regime for a violation of an order.
    Search(SearchArgs),
    /// Monte Carlo agreement between sampled and analytic lifetimes.
    Mc(McArgs),
    /// Run every task of a scenario file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GridModeArg {
    Raw,
    Transformed,
}

impl From<GridModeArg> for GridMode {
    fn from(m: GridModeArg) -> Self {
        match m {
            GridModeArg::Raw => GridMode::RawX,
            GridModeArg::Transformed => GridMode::TransformedY,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Series,
    Parallel,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Series => SystemKind::Series,
            KindArg::Parallel => SystemKind::Parallel,
        }
    }
}

/// Evaluation grid and tolerance; these override the scenario file.
#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Number of grid points.
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, value_enum)]
    pub grid_mode: Option<GridModeArg>,
    /// Lower probability level of the grid, in (0, 1).
    #[arg(long)]
    pub y_lo: Option<f64>,
    /// Upper probability level of the grid, in (0, 1).
    #[arg(long)]
    pub y_hi: Option<f64>,
    /// Comparison and monotonicity slack.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl NumericArgs {
    pub fn grid(&self) -> GridOverrides {
        GridOverrides {
            mode: self.grid_mode.map(Into::into),
            count: self.grid_n,
            y_lo: self.y_lo,
            y_hi: self.y_hi,
        }
    }

    pub fn tolerance(&self) -> ToleranceOverrides {
        self.tol.map(ToleranceOverrides::uniform).unwrap_or_default()
    }
}

/// Systems given on the command line as comma-separated parameter lists.
/// A single `beta` value is shared by all components.
#[derive(Debug, Clone, Args)]
pub struct InlineSystems {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha_star: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta_star: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "series")]
    pub kind: KindArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Name of system A in the scenario.
    #[arg(long, requires = "scenario")]
    pub a: Option<String>,
    /// Name of system B in the scenario.
    #[arg(long, requires = "scenario")]
    pub b: Option<String>,
    #[arg(long)]
    pub relation: Option<Relation>,
    #[command(flatten)]
    pub systems: InlineSystems,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long, env = "LFR_STOCH_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Regression cases as JSON (see --dump-presets) instead of the built-in matrix.
    #[arg(long)]
    pub presets: Option<PathBuf>,
    /// Print the built-in regression matrix as JSON and exit.
    #[arg(long)]
    pub dump_presets: bool,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Run the search tasks of this scenario instead of the flags below.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub relation: Option<Relation>,
    #[arg(long, value_enum, default_value = "series")]
    pub kind: KindArg,
    /// Components per system.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Componentwise constraints, e.g. `alpha_le,beta_ge`.
    #[arg(long, value_delimiter = ',')]
    pub regime: Vec<String>,
    /// Sampling range `lo,hi` shared by all four parameters.
    #[arg(long = "box", value_delimiter = ',', default_values_t = [0.01, 10.0], allow_negative_numbers = true)]
    pub param_box: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// System to sample (scenario name).
    #[arg(long, requires = "scenario")]
    pub system: Option<String>,
    /// Test the sample against this scenario system instead of its own cdf.
    #[arg(long, requires = "scenario")]
    pub against: Option<String>,
    /// Inline mode: test against the other system kind of the same components.
    #[arg(long, value_enum, conflicts_with = "scenario")]
    pub against_kind: Option<KindArg>,
    #[arg(long, default_value_t = 100_000)]
    pub size: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the sorted sample as CSV.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    #[command(flatten)]
    pub systems: InlineSystems,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for curve CSVs.
    #[arg(long, env = "LFR_STOCH_OUT", default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub numeric: NumericArgs,
}
