use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use roughvol::fbm_engine::FbmMethod;
use roughvol::forecaster::ForecastModel;
use roughvol::range_proxies::CloseToCloseMode;
use roughvol::rfsv_simulator::PriceScheme;
use roughvol::ProxyKind;

use crate::settings::{parse_kebab, SimModel, TrackChoice};

#[derive(Debug, Parser)]
#[command(name = "roughvol", version, about = "Rough volatility toolkit: proxies, scaling, simulation, forecasting")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "ROUGHVOL_THREADS")]
    pub threads: Option<usize>,

    /// TOML file with one table per command, or the manifest of a previous
    /// run to replay. Explicit flags win over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Log progress at info level.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daily volatility series from an OHLC file.
    Proxy(ProxyArgs),
    /// Moment scaling of log-volatility increments.
    Scaling(ScalingArgs),
    /// Simulate a stochastic volatility market and fit its scaling.
    Simulate(SimulateArgs),
    /// Rolling forecast backtest with the ratio P table.
    Forecast(ForecastArgs),
    /// Print a saved report or check a run manifest.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    /// OHLC CSV with header date,open,high,low,close.
    pub input: PathBuf,
    /// Volatility CSV to write.
    pub output: PathBuf,
    /// close-to-close, parkinson, gk-practical, gk-full or rogers-satchell.
    #[arg(long)]
    pub estimator: Option<ProxyKind>,
    /// previous-close or open.
    #[arg(long, value_parser = parse_kebab::<CloseToCloseMode>)]
    pub cc_mode: Option<CloseToCloseMode>,
    /// Benchmark volatility CSV; adds a comparison report.
    #[arg(long, value_name = "PATH")]
    pub benchmark: Option<PathBuf>,
    /// Where to write the comparison report (default: OUTPUT.comparison.json).
    #[arg(long, value_name = "PATH")]
    pub comparison: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Volatility CSV (ticker,proxy,date,sigma).
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long)]
    pub min_lag: Option<i64>,
    #[arg(long)]
    pub max_lag: Option<i64>,
    /// Lags with fewer increment pairs are left out.
    #[arg(long)]
    pub min_pairs: Option<usize>,
    /// Also estimate H on each half of the sample.
    #[arg(long)]
    pub split_halves: bool,
    /// Write increment histograms at these lags.
    #[arg(long, value_delimiter = ',')]
    pub histogram_lags: Option<Vec<i64>>,
    #[arg(long)]
    pub histogram_bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// rfsv, fsv or fsv-vs-rfsv.
    #[arg(long, value_parser = parse_kebab::<SimModel>)]
    pub model: Option<SimModel>,
    /// Hurst exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Volatility of volatility.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Mean-reversion speed per day.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Mean level of log-volatility.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    /// Initial log-volatility (default: the mean level).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub steps_per_day: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// euler or log-euler.
    #[arg(long, value_parser = parse_kebab::<PriceScheme>)]
    pub scheme: Option<PriceScheme>,
    #[arg(long)]
    pub window_hours: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// exact-circulant, exact-cholesky or wavelet.
    #[arg(long)]
    pub fbm_method: Option<FbmMethod>,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long)]
    pub max_lag: Option<i64>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Volatility CSV (ticker,proxy,date,sigma).
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Comma list, e.g. rfsv,ar5,ar10,har,garch.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ForecastModel>>,
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// log-variance, variance or both.
    #[arg(long, value_parser = parse_kebab::<TrackChoice>)]
    pub track: Option<TrackChoice>,
    /// Rolling window of the AR, HAR and GARCH fits.
    #[arg(long)]
    pub window: Option<usize>,
    /// Index of the first forecast origin.
    #[arg(long)]
    pub start: Option<usize>,
    /// Kernel mass dropped by truncating the history.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fix H instead of estimating it from the series.
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Fix nu^2 instead of estimating it from the series.
    #[arg(long)]
    pub nu_squared: Option<f64>,
    /// OHLC CSV of the same asset; its close-to-close returns feed GARCH.
    #[arg(long, value_name = "PATH")]
    pub ohlc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report JSON or a run manifest.
    pub input: PathBuf,
    /// Print the report data as JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
}
