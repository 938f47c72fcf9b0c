use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RegimeChoice;
use crate::sweep::{Axis, SweepOutput};

#[derive(Debug, Parser)]
#[command(name = "nmdrive", version, about = "Non-Markovianity of a laser-driven qubit in a Lorentzian reservoir")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay and shift rates on the time grid.
    Rates(Common),
    /// Integrate one initial state.
    Evolve(EvolveArgs),
    /// Divisibility rate g(T) and the divisibility measure.
    Rhp(RhpArgs),
    /// Best state pair for information backflow and the backflow measure.
    Blp(BlpArgs),
    /// Undriven versus driven qubit in the same reservoir.
    Compare(SearchArgs),
    /// Cartesian parameter sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeChoice>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Lorentzian centre frequency.
    #[arg(long = "omega0", allow_negative_numbers = true)]
    pub omega_0: Option<f64>,
    /// Laser frequency.
    #[arg(long = "omegaL", allow_negative_numbers = true)]
    pub omega_l: Option<f64>,
    /// Qubit transition frequency.
    #[arg(long = "omegaA", allow_negative_numbers = true)]
    pub omega_a: Option<f64>,
    /// Rabi frequency.
    #[arg(long = "Omega", allow_negative_numbers = true)]
    pub rabi: Option<f64>,
    /// Override s = (omega_0 - omega_L)/lambda by moving omega_0.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Override p = omega/lambda by rescaling Delta and Omega.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Horizon in units of 1/lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub tmax: Option<f64>,
    /// Output grid step in units of 1/lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// RK4 substep in units of 1/lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub substep: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Table output path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write the scalar summary as JSON to this path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Write an SVG chart to this path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial Bloch vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.0, 1.0])]
    pub bloch: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum MethodChoice {
    Numeric,
    Analytic,
    #[default]
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct RhpArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t)]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Antipodal directions in the coarse stage.
    #[arg(long, default_value_t = 128)]
    pub directions: usize,
    /// Random pure pairs in the coarse stage.
    #[arg(long, default_value_t = 64)]
    pub random_pairs: usize,
    /// Coarse candidates refined by Nelder-Mead.
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BlpArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    /// Fixed pair `x1,y1,z1,x2,y2,z2` instead of a search.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pair: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    /// `name=start:stop:steps` or `name=value`; repeatable, first is slowest.
    /// Names: omega_A, omega_L, Omega, alpha, lambda, omega_0, s, p, tmax.
    #[arg(long = "axis", required = true)]
    pub axes: Vec<Axis>,
    #[arg(long, value_enum, default_value_t)]
    pub outputs: SweepOutput,
}
