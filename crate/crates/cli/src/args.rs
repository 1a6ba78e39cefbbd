use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csr_core::{Family, Signal, Solver};

/// Cosine series representation of functional time series.
#[derive(Debug, Parser)]
#[command(name = "csr", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit expansion coefficients to every series of a CSV file.
    Fit(FitArgs),
    /// Replace every series by its fitted expansion on the same grid.
    Denoise(DenoiseArgs),
    /// Simulate observations from a mean signal plus expansion noise.
    Synth(SynthArgs),
    /// Compare boundary error of cosine, sine and Fourier fits.
    Gibbs(GibbsArgs),
    /// Evaluate a coefficient file on a grid.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridPolicy {
    /// Use the `t` column when present, otherwise a uniform grid.
    File,
    /// Ignore any `t` column and place samples at j/(n-1).
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Qr,
    Normal,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Qr => Solver::Qr,
            SolverArg::Normal => Solver::NormalEquations,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Expansion degree k.
    #[arg(long, default_value_t = 59)]
    pub degree: usize,
    /// Basis family: cosine, sine or fourier.
    #[arg(long, default_value = "cosine")]
    pub basis: Family,
}

#[derive(Debug, Args)]
pub struct SeriesInput {
    /// Input CSV: header row, optional first column `t`, one column per series.
    #[arg(long)]
    pub input: PathBuf,
    /// Z-score each series before fitting.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value = "file")]
    pub grid: GridPolicy,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: SeriesInput,
    /// Coefficient CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    /// JSON report path (default: output with a .json extension).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "qr")]
    pub solver: SolverArg,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Also write an SVG plot next to the output.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, default_value_t = 900)]
    pub width: u32,
    #[arg(long, default_value_t = 400)]
    pub height: u32,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub input: SeriesInput,
    /// Reconstruction CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub plot: PlotArgs,
    /// Comma-separated series labels or 1-based positions to plot (default: all).
    #[arg(long, value_delimiter = ',')]
    pub plot_series: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Observation CSV to write; the clean signal goes to <stem>.clean.csv
    /// and run metadata to <stem>.json.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Coefficient variances τ²: one value for all basis functions, a
    /// comma-separated list with one value per function, or @FILE.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    /// Standard deviation of the white residual noise.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Mean signal (zero, t, exp, const[:c], cos:L, sin:L, step[:at]).
    #[arg(long, default_value = "zero")]
    pub mean: Signal,
    #[arg(long, default_value_t = 1200)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub series: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GibbsArgs {
    /// Test signal (zero, t, exp, const[:c], cos:L, sin:L, step[:at]).
    #[arg(long, default_value = "t")]
    pub signal: Signal,
    #[arg(long, default_value_t = 59)]
    pub degree: usize,
    #[arg(long, default_value_t = 1200)]
    pub points: usize,
    /// Boundary width δ.
    #[arg(long, default_value_t = csr_core::diagnostics::DEFAULT_DELTA)]
    pub delta: f64,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Coefficient CSV written by `csr fit`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Evaluate on this many uniform points spanning the original time range.
    #[arg(long, conflicts_with = "like")]
    pub points: Option<usize>,
    /// Evaluate on the grid of this series CSV (its `t` column or row count).
    #[arg(long)]
    pub like: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "file")]
    pub grid: GridPolicy,
}
