//! Log-variance and variance forecasting: the fractional kernel predictor,
//! AR / HAR / GARCH baselines and the ratio-P backtest.

mod garch;
mod kernel;
mod linear;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use garch::{fit_garch, garch_forecast, garch_neg_log_lik, simulate_garch, GarchFit, GarchParams};
pub use kernel::{
    kernel_cdf, kernel_density, kernel_total_mass, predict_log_variance, predict_variance, rfsv_weights,
    tail_mass, truncation_radius, variance_correction_c, variance_from_log, KernelCache, KernelTable,
    RfsvPredictorConfig, DEFAULT_EPSILON,
};
pub use linear::{ar_fit_predict, har_fit_predict, LinearForecast, DEFAULT_WINDOW};

use crate::error::{Error, Result};
use crate::market_data::{calendar_lag, write_atomic, ProxyKind, Report, VolSeries};
use crate::scalar::{mean, Real};
use crate::scaling_lab::{fit_scaling, ScalingConfig, ScalingReport};

/// nu^2 = exp(intercept of the q = 2 regression of log m on log lag).
pub fn estimate_nu_squared<T: Real>(scaling: &ScalingReport<T>) -> Result<T> {
    scaling
        .nu_squared()
        .ok_or_else(|| Error::InvalidArgument("scaling report has no q = 2 fit".into()))
}

/// sum (actual - pred)^2 / sum (actual - reference_mean)^2.
pub fn ratio_p<T: Real>(predictions: &[T], actuals: &[T], reference_mean: T) -> Result<T> {
    if predictions.len() != actuals.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData("no forecasts to evaluate".into()));
    }
    let num: T = predictions.iter().zip(actuals).map(|(&p, &a)| (a - p) * (a - p)).sum();
    let den: T = actuals.iter().map(|&a| (a - reference_mean) * (a - reference_mean)).sum();
    if !(den > T::zero()) {
        return Err(Error::DegenerateRegression("target is constant; ratio P undefined".into()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ForecastModel {
    /// Direct AR with lags 0..=p.
    Ar(usize),
    Har,
    Garch,
    Rfsv,
}

impl ForecastModel {
    pub fn label(&self) -> String {
        match self {
            ForecastModel::Ar(p) => format!("AR({p})"),
            ForecastModel::Har => "HAR(3)".into(),
            ForecastModel::Garch => "GARCH(1,1)".into(),
            ForecastModel::Rfsv => "RFSV".into(),
        }
    }

    /// The default set compared in the backtest tables.
    pub fn standard_set() -> Vec<ForecastModel> {
        vec![
            ForecastModel::Ar(5),
            ForecastModel::Ar(10),
            ForecastModel::Har,
            ForecastModel::Garch,
            ForecastModel::Rfsv,
        ]
    }
}

impl fmt::Display for ForecastModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<ForecastModel> for String {
    fn from(m: ForecastModel) -> String {
        m.label()
    }
}

impl TryFrom<String> for ForecastModel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ForecastModel {
    type Err = Error;

    /// Accepts `rfsv`, `har`, `har(3)`, `garch`, `garch(1,1)`, `ar5`, `ar(5)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "rfsv" => return Ok(ForecastModel::Rfsv),
            "har" | "har(3)" | "har3" => return Ok(ForecastModel::Har),
            "garch" | "garch(1,1)" | "garch11" => return Ok(ForecastModel::Garch),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("ar") {
            let digits = rest.trim_start_matches('(').trim_end_matches(')');
            if let Ok(p) = digits.parse::<usize>() {
                if p >= 1 {
                    return Ok(ForecastModel::Ar(p));
                }
            }
        }
        Err(Error::InvalidArgument(format!("unknown forecast model '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Track {
    LogVariance,
    Variance,
}

impl Track {
    pub fn name(self) -> &'static str {
        match self {
            Track::LogVariance => "log-variance",
            Track::Variance => "variance",
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log-variance" | "log" | "logvar" => Ok(Track::LogVariance),
            "variance" | "var" => Ok(Track::Variance),
            other => Err(Error::InvalidArgument(format!("unknown track '{other}'"))),
        }
    }
}

/// Ratio P of one (model, track, horizon) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ForecastEval<T> {
    pub ticker: String,
    pub model: ForecastModel,
    pub track: Track,
    /// Horizon in observations.
    pub horizon: usize,
    pub ratio_p: T,
    pub n_forecasts: usize,
    /// Days where the model could not be fitted.
    pub n_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BacktestConfig<T> {
    pub models: Vec<ForecastModel>,
    pub horizons: Vec<usize>,
    pub tracks: Vec<Track>,
    /// Rolling window of the AR, HAR and GARCH fits.
    pub window: usize,
    /// First forecast origin (0-based index into the series).
    pub start_index: usize,
    pub epsilon: T,
    /// Kernel H; estimated from the whole series when `None`.
    pub hurst: Option<T>,
    /// nu^2 for the variance correction; estimated from the whole series when `None`.
    pub nu_squared: Option<T>,
    pub scaling: ScalingConfig<T>,
}

impl<T: Real> Default for BacktestConfig<T> {
    fn default() -> Self {
        BacktestConfig {
            models: ForecastModel::standard_set(),
            horizons: vec![1, 5, 21],
            tracks: vec![Track::LogVariance, Track::Variance],
            window: DEFAULT_WINDOW,
            start_index: DEFAULT_WINDOW,
            epsilon: T::lit(DEFAULT_EPSILON),
            hurst: None,
            nu_squared: None,
            scaling: ScalingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BacktestReport<T> {
    pub ticker: String,
    pub proxy: ProxyKind,
    pub n_obs: usize,
    pub hurst: Option<T>,
    pub nu_squared: Option<T>,
    pub config: BacktestConfig<T>,
    pub evals: Vec<ForecastEval<T>>,
    /// Cells that produced no result, with the reason.
    pub failures: Vec<String>,
}

impl<T: Real> Report for BacktestReport<T> {
    const KIND: &'static str = "forecast-backtest";
}

impl<T: Real> BacktestReport<T> {
    pub fn get(&self, model: ForecastModel, track: Track, horizon: usize) -> Option<&ForecastEval<T>> {
        self.evals
            .iter()
            .find(|e| e.model == model && e.track == track && e.horizon == horizon)
    }
}

struct Cell<T> {
    preds: Vec<T>,
    actuals: Vec<T>,
    skipped: usize,
}

impl<T> Default for Cell<T> {
    fn default() -> Self {
        Cell {
            preds: Vec::new(),
            actuals: Vec::new(),
            skipped: 0,
        }
    }
}

struct SeriesView<'a, T> {
    dates: &'a [NaiveDate],
    log_var: &'a [T],
    var: &'a [T],
    returns: Option<&'a [(NaiveDate, T)]>,
}

impl<T: Real> SeriesView<'_, T> {
    fn track(&self, track: Track) -> &[T] {
        match track {
            Track::LogVariance => self.log_var,
            Track::Variance => self.var,
        }
    }
}

type CellKey = (Track, usize);

/// Rolling forecasts of one model over every origin `k >= start_index` with
/// a target inside the series.
fn run_model<T: Real>(
    model: ForecastModel,
    view: &SeriesView<'_, T>,
    config: &BacktestConfig<T>,
    hurst: Option<T>,
    nu_squared: Option<T>,
) -> Result<HashMap<CellKey, Cell<T>>> {
    let n = view.dates.len();
    let tracks: Vec<Track> = if model == ForecastModel::Garch {
        config.tracks.iter().copied().filter(|&t| t == Track::Variance).collect()
    } else {
        config.tracks.clone()
    };
    let mut cells: HashMap<CellKey, Cell<T>> = HashMap::new();
    if tracks.is_empty() {
        return Ok(cells);
    }
    let mut kernels = match model {
        ForecastModel::Rfsv => {
            let h = hurst.ok_or_else(|| Error::InvalidArgument("RFSV needs a Hurst exponent".into()))?;
            if tracks.contains(&Track::Variance) && nu_squared.is_none() {
                return Err(Error::InvalidArgument("RFSV variance forecasts need nu^2".into()));
            }
            Some(KernelCache::new(h, config.epsilon))
        }
        _ => None,
    };
    if model == ForecastModel::Garch && view.returns.is_none() {
        return Err(Error::InvalidArgument("GARCH needs daily returns (an OHLC file)".into()));
    }
    let min_h = config.horizons.iter().copied().min().unwrap_or(1);
    let mut garch_prev: Option<GarchParams<T>> = None;
    let mut ret_end = 0usize;
    for k in config.start_index..n.saturating_sub(min_h) {
        // GARCH refit once per origin, shared across horizons.
        let garch_now = if model == ForecastModel::Garch {
            let rets = view.returns.unwrap_or(&[]);
            while ret_end < rets.len() && rets[ret_end].0 <= view.dates[k] {
                ret_end += 1;
            }
            let lo = ret_end.saturating_sub(config.window);
            let window: Vec<T> = rets[lo..ret_end].iter().map(|r| r.1).collect();
            match fit_garch(&window, garch_prev.as_ref()) {
                Ok(f) => {
                    garch_prev = Some(f.params);
                    Some(f.params)
                }
                Err(e) => {
                    log::debug!("GARCH fit at {}: {e}; keeping previous fit", view.dates[k]);
                    garch_prev
                }
            }
        } else {
            None
        };
        for &h in &config.horizons {
            if k + h >= n {
                continue;
            }
            for &track in &tracks {
                let y = view.track(track);
                let pred = match model {
                    ForecastModel::Ar(p) => ar_fit_predict(&y[..=k], p, h, config.window).map(|f| f.prediction),
                    ForecastModel::Har => har_fit_predict(&y[..=k], h, config.window).map(|f| f.prediction),
                    ForecastModel::Garch => garch_now
                        .map(|g| garch_forecast(&g, view.var[k], h))
                        .ok_or_else(|| Error::Optimizer("no GARCH fit available yet".into())),
                    ForecastModel::Rfsv => {
                        let cal = calendar_lag(view.dates[k], view.dates[k + h])?;
                        let table = kernels.as_mut().expect("kernel cache").table(cal)?;
                        table.predict(&view.dates[..=k], &view.log_var[..=k]).map(|lv| match track {
                            Track::LogVariance => lv,
                            Track::Variance => variance_from_log(
                                lv,
                                table.hurst(),
                                nu_squared.unwrap_or_else(T::zero),
                                T::lit(cal as f64),
                            ),
                        })
                    }
                };
                let cell = cells.entry((track, h)).or_default();
                match pred {
                    Ok(p) if p.is_finite() => {
                        cell.preds.push(p);
                        cell.actuals.push(y[k + h]);
                    }
                    Ok(_) => cell.skipped += 1,
                    Err(e) => {
                        log::debug!("{model} h={h} at {}: {e}", view.dates[k]);
                        cell.skipped += 1;
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Daily rolling forecasts for every (model, track, horizon) and their ratio P
/// against the full-period mean of the target. `returns` (dated close-to-close
/// log returns) are needed for GARCH only.
pub fn backtest<T: Real>(
    series: &VolSeries<T>,
    returns: Option<&[(NaiveDate, T)]>,
    config: &BacktestConfig<T>,
) -> Result<BacktestReport<T>> {
    let n = series.len();
    let max_h = config.horizons.iter().copied().max().unwrap_or(0);
    if config.horizons.contains(&0) {
        return Err(Error::InvalidArgument("horizons must be >= 1".into()));
    }
    if config.window < 50 {
        return Err(Error::InvalidArgument(format!("window must be >= 50, got {}", config.window)));
    }
    let mut report = BacktestReport {
        ticker: series.ticker().to_string(),
        proxy: series.proxy(),
        n_obs: n,
        hurst: config.hurst,
        nu_squared: config.nu_squared,
        config: config.clone(),
        evals: Vec::new(),
        failures: Vec::new(),
    };
    if config.models.is_empty() {
        return Ok(report);
    }
    if n <= config.start_index + max_h {
        return Err(Error::InsufficientData(format!(
            "backtest needs more than {} observations, got {n}",
            config.start_index + max_h
        )));
    }
    if config.models.contains(&ForecastModel::Rfsv) && (config.hurst.is_none() || config.nu_squared.is_none()) {
        match fit_scaling(series, &config.scaling) {
            Ok(s) => {
                report.hurst = report.hurst.or(Some(s.hurst));
                report.nu_squared = report.nu_squared.or(s.nu_squared());
            }
            Err(e) => report.failures.push(format!("RFSV: scaling fit failed: {e}")),
        }
    }
    let dates = series.dates();
    let log_var = series.log_variance();
    let var = series.variance();
    let view = SeriesView {
        dates: &dates,
        log_var: &log_var,
        var: &var,
        returns,
    };
    let results: Vec<(ForecastModel, Result<HashMap<CellKey, Cell<T>>>)> = config
        .models
        .par_iter()
        .map(|&m| (m, run_model(m, &view, config, report.hurst, report.nu_squared)))
        .collect();
    for (model, res) in results {
        let cells = match res {
            Ok(c) => c,
            Err(e) => {
                report.failures.push(format!("{model}: {e}"));
                continue;
            }
        };
        for &track in &config.tracks {
            for &h in &config.horizons {
                let Some(cell) = cells.get(&(track, h)) else { continue };
                let full_mean = mean(view.track(track));
                match ratio_p(&cell.preds, &cell.actuals, full_mean) {
                    Ok(p) => report.evals.push(ForecastEval {
                        ticker: series.ticker().to_string(),
                        model,
                        track,
                        horizon: h,
                        ratio_p: p,
                        n_forecasts: cell.preds.len(),
                        n_skipped: cell.skipped,
                    }),
                    Err(e) => report.failures.push(format!("{model} {track} h={h}: {e}")),
                }
            }
        }
    }
    Ok(report)
}

/// Writes `ticker,model,horizon,ratio_p,n_forecasts` for one track.
pub fn write_eval_csv<T: Real>(evals: &[ForecastEval<T>], track: Track, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    let io = |e| Error::io(path, e);
    writeln!(buf, "ticker,model,horizon,ratio_p,n_forecasts").map_err(io)?;
    for e in evals.iter().filter(|e| e.track == track) {
        writeln!(buf, "{},{},{},{},{}", e.ticker, e.model, e.horizon, e.ratio_p, e.n_forecasts).map_err(io)?;
    }
    write_atomic(path, &buf)
}
