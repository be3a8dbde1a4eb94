use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kumlest", version, about = "Kumaraswamy-weighted L-estimation of claim severity models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to loss data with L-estimators and/or maximum likelihood.
    Fit(FitArgs),
    /// Asymptotic relative efficiency of L-estimators over a grid of shapes.
    Are(AreArgs),
    /// Monte Carlo comparison of estimators.
    Simulate(SimulateArgs),
    /// Kolmogorov-Smirnov test of a fitted or given model.
    Ks(KsArgs),
    /// Kumaraswamy weights at the plotting positions i/(n+1).
    Weights(WeightsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// pareto, lognormal or frechet.
    #[arg(long)]
    pub model: String,
    /// Pareto scale (required) or lognormal threshold (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with one numeric column.
    #[arg(long)]
    pub input: PathBuf,
    /// Column name or 0-based index.
    #[arg(long, default_value = "0")]
    pub column: String,
    /// auto, yes or no.
    #[arg(long, default_value = "auto")]
    pub header: String,
    /// Replace the largest observation with this value before fitting.
    #[arg(long)]
    pub replace_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegrationArgs {
    /// Integrate over [eps, 1 - eps] instead of (0, 1); `reference` selects
    /// the windows that reproduce the published efficiency tables.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Kumaraswamy shape `A,B`; repeat for several fits.
    #[arg(long = "weights", value_name = "A,B")]
    pub weights: Vec<String>,
    /// Include the maximum likelihood fit.
    #[arg(long)]
    pub mle: bool,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AreArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, conflicts_with = "a_grid")]
    pub a: Option<f64>,
    #[arg(long, conflicts_with = "b_grid")]
    pub b: Option<f64>,
    /// Comma-separated values of a.
    #[arg(long)]
    pub a_grid: Option<String>,
    /// Comma-separated values of b.
    #[arg(long)]
    pub b_grid: Option<String>,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// True parameters, comma-separated in the family's order.
    #[arg(long, allow_hyphen_values = true)]
    pub params: String,
    #[arg(long = "weights", value_name = "A,B")]
    pub weights: Vec<String>,
    #[arg(long)]
    pub mle: bool,
    /// Sample sizes, comma-separated.
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 10)]
    pub batches: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Model parameters, comma-separated; otherwise the model is fitted.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["weights", "mle"])]
    pub params: Option<String>,
    /// Fit with this Kumaraswamy shape before testing.
    #[arg(long = "weights", value_name = "A,B")]
    pub weights: Option<String>,
    /// Fit by maximum likelihood before testing.
    #[arg(long)]
    pub mle: bool,
    /// Also write quantile-quantile pairs to this CSV file.
    #[arg(long)]
    pub qq_out: Option<PathBuf>,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    /// Number of order statistics; taken from the data when --input is given.
    #[arg(long, required_unless_present = "input")]
    pub n: Option<usize>,
    /// Loss data; adds each order statistic and its weighted value.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    pub column: String,
    #[arg(long, default_value = "auto")]
    pub header: String,
    #[command(flatten)]
    pub output: OutputArgs,
}
