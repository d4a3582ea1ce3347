//! Fractional stochastic volatility simulation: daily log-volatility from a
//! fractional Ornstein-Uhlenbeck recursion, intraday prices under constant
//! daily volatility, and the proxy-recovery experiments built on them.

use chrono::NaiveDate;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm_engine::{simulate_fbm_with_rng, FbmMethod};
use crate::market_data::{OhlcBar, OhlcSeries, ProxyKind, Report, VolSeries};
use crate::range_proxies::LogRange;
use crate::rng::stream_rng;
use crate::scalar::{mean, sample_variance, Real};
use crate::scaling_lab::{detect_slope_break, fit_scaling_raw, ScalingConfig, ScalingReport, SlopeBreak};

/// Stream of the seed that drives the fBm.
pub const FBM_STREAM: u64 = 0;
/// Stream of the seed that drives intraday price shocks.
pub const PRICE_STREAM: u64 = 1;
/// Stream of the seed that drives measurement noise in synthetic series.
pub const NOISE_STREAM: u64 = 2;

/// dX = -alpha (X - m) dt + nu dW^H, X_0 = x0. Time in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FouParams<T> {
    pub hurst: T,
    pub nu: T,
    pub alpha: T,
    pub mean_level: T,
    pub x0: T,
}

impl<T: Real> FouParams<T> {
    pub fn new(hurst: T, nu: T, alpha: T, mean_level: T, x0: T) -> Result<Self> {
        let p = FouParams {
            hurst,
            nu,
            alpha,
            mean_level,
            x0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rough volatility calibrated to a large-cap equity index.
    pub fn rfsv_index() -> Self {
        FouParams {
            hurst: T::lit(0.08),
            nu: T::lit(0.3),
            alpha: T::lit(5e-4),
            mean_level: T::lit(-5.0),
            x0: T::lit(-5.0),
        }
    }

    /// Smooth, strongly mean-reverting comparison model.
    pub fn fsv_comparison() -> Self {
        FouParams {
            hurst: T::lit(0.7),
            nu: T::lit(0.25),
            alpha: T::lit(0.25),
            mean_level: T::lit(-4.5),
            x0: T::lit(-4.5),
        }
    }

    /// Rough counterpart of [`FouParams::fsv_comparison`].
    pub fn rfsv_comparison() -> Self {
        FouParams {
            hurst: T::lit(0.08),
            nu: T::lit(0.45),
            alpha: T::lit(5e-4),
            mean_level: T::lit(-5.0),
            x0: T::lit(-5.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > T::zero() && self.hurst < T::one()) {
            return Err(Error::InvalidArgument(format!("hurst must lie in (0, 1), got {}", self.hurst)));
        }
        if !(self.nu > T::zero()) || !self.nu.is_finite() {
            return Err(Error::InvalidArgument(format!("nu must be > 0, got {}", self.nu)));
        }
        if !(self.alpha >= T::zero()) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !self.mean_level.is_finite() || !self.x0.is_finite() {
            return Err(Error::InvalidArgument("mean level and x0 must be finite".into()));
        }
        Ok(())
    }
}

/// How intraday prices evolve within a day of constant volatility sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriceScheme {
    /// P <- P (1 + sigma sqrt(delta) U), redrawing U if the price would be <= 0.
    #[default]
    Euler,
    /// log P <- log P + sigma sqrt(delta) U. Days are summarized relative to
    /// a unit-volatility day, so arbitrarily large or small sigma cannot
    /// overflow.
    LogEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_days: usize,
    pub steps_per_day: usize,
    pub p0: f64,
    pub seed: u64,
    /// Trading window per day, in hours. The intraday step is
    /// delta = (window_hours / 24) / steps_per_day days.
    pub window_hours: f64,
    pub scheme: PriceScheme,
    pub fbm_method: FbmMethod,
    pub start_date: NaiveDate,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_days: 2521,
            steps_per_day: 23_400,
            p0: 100.0,
            seed: 0,
            window_hours: 24.0,
            scheme: PriceScheme::Euler,
            fbm_method: FbmMethod::ExactCirculant,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_days < 1 {
            return Err(Error::InvalidArgument("n_days must be >= 1".into()));
        }
        if self.steps_per_day < 1 {
            return Err(Error::InvalidArgument("steps_per_day must be >= 1".into()));
        }
        if !(self.p0 > 0.0) || !self.p0.is_finite() {
            return Err(Error::InvalidArgument(format!("p0 must be > 0, got {}", self.p0)));
        }
        if !(self.window_hours > 0.0 && self.window_hours <= 24.0) {
            return Err(Error::InvalidArgument(format!(
                "window_hours must lie in (0, 24], got {}",
                self.window_hours
            )));
        }
        Ok(())
    }

    /// Intraday step in days.
    pub fn delta(&self) -> f64 {
        self.window_hours / 24.0 / self.steps_per_day as f64
    }

    /// Consecutive calendar days from `start_date`.
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.start_date
            .iter_days()
            .take(self.n_days)
            .collect()
    }
}

/// Daily log-volatility path of length `n_days` (X_0 = x0) driven by an exact fBm.
pub fn simulate_fou<T: Real>(params: &FouParams<T>, n_days: usize, seed: u64) -> Result<Vec<T>> {
    simulate_fou_with_driver(params, n_days, seed, FbmMethod::ExactCirculant).map(|(x, _)| x)
}

/// The fOU path together with its driving fBm values W_0 = 0, ..., W_{n-1}.
pub fn simulate_fou_with_driver<T: Real>(
    params: &FouParams<T>,
    n_days: usize,
    seed: u64,
    method: FbmMethod,
) -> Result<(Vec<T>, Vec<T>)> {
    params.validate()?;
    if n_days == 0 {
        return Err(Error::InvalidArgument("n_days must be >= 1".into()));
    }
    let w = if n_days == 1 {
        vec![T::zero()]
    } else {
        let mut rng = stream_rng(seed, FBM_STREAM);
        simulate_fbm_with_rng(n_days, params.hurst, T::one(), method, &mut rng)?.into_values()
    };
    Ok((fou_from_driver(params, &w), w))
}

/// X_{n+1} - X_n = nu (W_{n+1} - W_n) + alpha (m - X_n), written as
/// X_n = x0 + nu W_n + D_n with the drift part D accumulated separately, so
/// that alpha = 0 gives exactly x0 + nu W_n.
pub fn fou_from_driver<T: Real>(params: &FouParams<T>, w: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(w.len());
    let mut drift = T::zero();
    for &wn in w {
        let x = params.x0 + params.nu * wn + drift;
        out.push(x);
        drift = drift + params.alpha * (params.mean_level - x);
    }
    out
}

/// One simulated day reduced to what the proxies need. Excursions are log
/// ratios to the open; under [`PriceScheme::LogEuler`] they describe a
/// unit-volatility day and `log_scale` is the day's log-volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DaySummary<T> {
    pub log_scale: T,
    pub u: T,
    pub d: T,
    pub c: T,
    /// Sum of squared intraday log returns.
    pub rv: T,
}

impl<T: Real> DaySummary<T> {
    /// Daily variance of `proxy` in units of exp(2 log_scale); `None` if the
    /// proxy is not computable from one day or is not positive.
    pub fn unit_variance(&self, proxy: ProxyKind) -> Option<T> {
        let v = match proxy {
            ProxyKind::RealizedVolatility => self.rv,
            // The day opens at the previous close.
            ProxyKind::CloseToClose => self.c * self.c,
            ProxyKind::SimulatedTruth => return None,
            kind => LogRange {
                u: self.u,
                d: self.d,
                c: self.c,
            }
            .variance(kind)?,
        };
        (v > T::zero()).then_some(v)
    }

    pub fn log_vol(&self, proxy: ProxyKind) -> Option<T> {
        self.unit_variance(proxy)
            .map(|v| self.log_scale + T::lit(0.5) * v.ln())
    }
}

struct DayRunner<T> {
    sqrt_delta: T,
    steps: usize,
    scheme: PriceScheme,
    redraws: u64,
}

const MAX_REDRAWS_PER_STEP: usize = 1000;

impl<T: Real> DayRunner<T> {
    /// Simulates one day starting from `price` (updated to the close). Prices
    /// after each step go to `sink` when given.
    fn run(
        &mut self,
        log_vol: T,
        price: &mut T,
        rng: &mut ChaCha8Rng,
        mut sink: Option<&mut Vec<T>>,
    ) -> Result<DaySummary<T>> {
        match self.scheme {
            PriceScheme::Euler => {
                let open = *price;
                let s = log_vol.exp() * self.sqrt_delta;
                let (mut hi, mut lo, mut p, mut rv) = (open, open, open, T::zero());
                for _ in 0..self.steps {
                    let mut tries = 0;
                    let r = loop {
                        let r = s * T::std_normal(rng);
                        if r > -T::one() {
                            break r;
                        }
                        tries += 1;
                        self.redraws += 1;
                        if tries >= MAX_REDRAWS_PER_STEP {
                            return Err(Error::Numerical(format!(
                                "Euler price step keeps hitting zero (sigma sqrt(delta) = {s}); use the log-Euler scheme"
                            )));
                        }
                    };
                    let lr = r.ln_1p();
                    rv = rv + lr * lr;
                    p = p * (T::one() + r);
                    hi = hi.max(p);
                    lo = lo.min(p);
                    if let Some(buf) = sink.as_deref_mut() {
                        buf.push(p);
                    }
                }
                let day = DaySummary {
                    log_scale: T::zero(),
                    u: (hi / open).ln(),
                    d: (lo / open).ln(),
                    c: (p / open).ln(),
                    rv,
                };
                if !(p > T::zero() && p.is_finite() && day.u.is_finite() && day.d.is_finite() && rv.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "Euler prices left the floating-point range (sigma sqrt(delta) = {s}); use the log-Euler scheme"
                    )));
                }
                *price = p;
                Ok(day)
            }
            PriceScheme::LogEuler => {
                let (mut y, mut hi, mut lo, mut rv) = (T::zero(), T::zero(), T::zero(), T::zero());
                let sigma = log_vol.exp();
                let open = *price;
                for _ in 0..self.steps {
                    let z = self.sqrt_delta * T::std_normal(rng);
                    y = y + z;
                    rv = rv + z * z;
                    hi = hi.max(y);
                    lo = lo.min(y);
                    if let Some(buf) = sink.as_deref_mut() {
                        buf.push(open * (sigma * y).exp());
                    }
                }
                *price = open * (sigma * y).exp();
                Ok(DaySummary {
                    log_scale: log_vol,
                    u: hi,
                    d: lo,
                    c: y,
                    rv,
                })
            }
        }
    }
}

fn runner<T: Real>(config: &SimConfig) -> DayRunner<T> {
    DayRunner {
        sqrt_delta: T::lit(config.delta().sqrt()),
        steps: config.steps_per_day,
        scheme: config.scheme,
        redraws: 0,
    }
}

/// Per-day summaries for the daily log-volatility path, without storing
/// intraday prices. Returns the summaries and the number of redrawn steps.
pub fn simulate_day_summaries<T: Real>(
    log_vol: &[T],
    config: &SimConfig,
) -> Result<(Vec<DaySummary<T>>, u64)> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, PRICE_STREAM);
    let mut run = runner::<T>(config);
    let mut price = T::lit(config.p0);
    let days = log_vol
        .iter()
        .map(|&x| run.run(x, &mut price, &mut rng, None))
        .collect::<Result<Vec<_>>>()?;
    Ok((days, run.redraws))
}

/// Intraday prices: `days[n]` holds the open followed by the price after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct IntradayPaths<T> {
    pub days: Vec<Vec<T>>,
    pub redraws: u64,
}

/// Intraday price arrays for a daily volatility path (sigma per sqrt(day)).
/// Each day opens at the previous close. Uses the same random stream as
/// [`simulate_day_summaries`], so both describe the same prices.
pub fn simulate_intraday<T: Real>(vol_path: &[T], config: &SimConfig) -> Result<IntradayPaths<T>> {
    config.validate()?;
    if let Some(s) = vol_path.iter().find(|s| !(**s >= T::zero()) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("volatility must be finite and >= 0, got {s}")));
    }
    let mut rng = stream_rng(config.seed, PRICE_STREAM);
    let mut run = runner::<T>(config);
    let mut price = T::lit(config.p0);
    let mut days = Vec::with_capacity(vol_path.len());
    for &sigma in vol_path {
        let mut buf = Vec::with_capacity(config.steps_per_day + 1);
        buf.push(price);
        run.run(sigma.ln(), &mut price, &mut rng, Some(&mut buf))?;
        days.push(buf);
    }
    Ok(IntradayPaths {
        days,
        redraws: run.redraws,
    })
}

/// Open = first, close = last, high = max, low = min of each day's prices.
pub fn extract_ohlc<T: Real>(ticker: &str, days: &[Vec<T>], dates: &[NaiveDate]) -> Result<OhlcSeries<T>> {
    if days.len() != dates.len() {
        return Err(Error::InvalidArgument(format!(
            "{} days of prices for {} dates",
            days.len(),
            dates.len()
        )));
    }
    let bars = days
        .iter()
        .zip(dates)
        .map(|(prices, &date)| {
            let (Some(&open), Some(&close)) = (prices.first(), prices.last()) else {
                return Err(Error::InvalidArgument(format!("no prices on {date}")));
            };
            let high = prices.iter().copied().fold(T::neg_infinity(), T::max);
            let low = prices.iter().copied().fold(T::infinity(), T::min);
            OhlcBar::new(date, open, high, low, close)
        })
        .collect::<Result<Vec<_>>>()?;
    OhlcSeries::new(ticker, bars)
}

/// Sum of squared log returns over one day's prices.
pub fn realized_variance<T: Real>(prices: &[T]) -> Result<T> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData("realized variance needs two prices".into()));
    }
    if let Some(p) = prices.iter().find(|p| !(**p > T::zero())) {
        return Err(Error::InvalidArgument(format!("non-positive price {p}")));
    }
    Ok(prices
        .windows(2)
        .map(|w| {
            let r = (w[1] / w[0]).ln();
            r * r
        })
        .sum())
}

/// A simulated market: the true log-volatility and the daily price summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimulatedMarket<T> {
    pub params: FouParams<T>,
    pub config: SimConfig,
    pub dates: Vec<NaiveDate>,
    pub true_log_vol: Vec<T>,
    pub days: Vec<DaySummary<T>>,
    /// Absolute OHLC prices; `None` when they leave the floating-point range.
    pub ohlc: Option<OhlcSeries<T>>,
    pub redraws: u64,
}

pub fn simulate_market<T: Real>(params: &FouParams<T>, config: &SimConfig) -> Result<SimulatedMarket<T>> {
    config.validate()?;
    let (x, _) = simulate_fou_with_driver(params, config.n_days, config.seed, config.fbm_method)?;
    let (days, redraws) = simulate_day_summaries(&x, config)?;
    let dates = config.dates();
    let ohlc = ohlc_from_summaries(&days, &dates, T::lit(config.p0));
    if ohlc.is_none() {
        log::warn!("simulated prices left the floating-point range; OHLC output unavailable");
    }
    if redraws > 0 {
        log::warn!("{redraws} intraday step(s) redrawn to keep prices positive");
    }
    Ok(SimulatedMarket {
        params: *params,
        config: config.clone(),
        dates,
        true_log_vol: x,
        days,
        ohlc,
        redraws,
    })
}

fn ohlc_from_summaries<T: Real>(days: &[DaySummary<T>], dates: &[NaiveDate], p0: T) -> Option<OhlcSeries<T>> {
    let mut log_open = p0.ln();
    let mut bars = Vec::with_capacity(days.len());
    for (s, &date) in days.iter().zip(dates) {
        let scale = s.log_scale.exp();
        let (ho, lo, co) = (scale * s.u, scale * s.d, scale * s.c);
        let open = log_open.exp();
        let bar = OhlcBar::new(
            date,
            open,
            (log_open + ho).exp().max(open),
            (log_open + lo).exp().min(open),
            (log_open + co).exp(),
        )
        .ok()?;
        bars.push(OhlcBar {
            high: bar.high.max(bar.close),
            low: bar.low.min(bar.close),
            ..bar
        });
        log_open = log_open + co;
    }
    OhlcSeries::new("SIM", bars).ok()
}

impl<T: Real> SimulatedMarket<T> {
    pub fn true_vol(&self) -> Result<VolSeries<T>> {
        VolSeries::from_log_vol("SIM", ProxyKind::SimulatedTruth, &self.dates, &self.true_log_vol)
    }

    /// Dated log-volatility of a proxy; days where it is not positive are dropped.
    pub fn proxy_log_vol(&self, proxy: ProxyKind) -> (Vec<NaiveDate>, Vec<T>) {
        if proxy == ProxyKind::SimulatedTruth {
            return (self.dates.clone(), self.true_log_vol.clone());
        }
        let mut dropped = 0usize;
        let (d, x) = self
            .days
            .iter()
            .zip(&self.dates)
            .filter_map(|(s, &date)| {
                let v = s.log_vol(proxy);
                if v.is_none() {
                    dropped += 1;
                }
                v.map(|v| (date, v))
            })
            .unzip();
        if dropped > 0 {
            log::warn!("{proxy}: dropped {dropped} day(s) with non-positive variance");
        }
        (d, x)
    }

    pub fn proxy_vol(&self, proxy: ProxyKind) -> Result<VolSeries<T>> {
        let (d, x) = self.proxy_log_vol(proxy);
        VolSeries::from_log_vol("SIM", proxy, &d, &x)
    }

    pub fn realized_vol(&self) -> Result<VolSeries<T>> {
        self.proxy_vol(ProxyKind::RealizedVolatility)
    }

    pub fn gk_vol(&self) -> Result<VolSeries<T>> {
        self.proxy_vol(ProxyKind::GarmanKlassPractical)
    }

    pub fn scaling(&self, proxy: ProxyKind, config: &ScalingConfig<T>) -> Result<ScalingReport<T>> {
        let (d, x) = self.proxy_log_vol(proxy);
        fit_scaling_raw("SIM", proxy, &d, &x, config)
    }
}

/// Scaling of the true log-volatility next to the RV and GK proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProxyRecoveryReport<T> {
    pub params: FouParams<T>,
    pub config: SimConfig,
    pub truth: ScalingReport<T>,
    pub realized: ScalingReport<T>,
    pub garman_klass: ScalingReport<T>,
    pub redraws: u64,
}

impl<T: Real> Report for ProxyRecoveryReport<T> {
    const KIND: &'static str = "proxy-recovery";
}

/// Simulate, extract daily proxies and fit the scaling of each.
pub fn proxy_recovery_experiment<T: Real>(
    params: &FouParams<T>,
    config: &SimConfig,
    scaling: &ScalingConfig<T>,
) -> Result<(SimulatedMarket<T>, ProxyRecoveryReport<T>)> {
    let market = simulate_market(params, config)?;
    let report = ProxyRecoveryReport {
        params: *params,
        config: config.clone(),
        truth: market.scaling(ProxyKind::SimulatedTruth, scaling)?,
        realized: market.scaling(ProxyKind::RealizedVolatility, scaling)?,
        garman_klass: market.scaling(ProxyKind::GarmanKlassPractical, scaling)?,
        redraws: market.redraws,
    };
    Ok((market, report))
}

/// Two-regime diagnostics of one model's scaling curve at q = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegimeDiagnostics<T> {
    pub log_vol_mean: T,
    pub log_vol_variance: T,
    /// q = 1 slope over lags 1..=5.
    pub short_slope: T,
    /// q = 1 slope over lags 100..=400.
    pub long_slope: T,
    /// Single-line fit over lags 1..=400.
    pub full_r_squared: T,
    pub truth_break: SlopeBreak<T>,
    pub realized_break: SlopeBreak<T>,
    pub garman_klass_break: SlopeBreak<T>,
}

impl<T: Real> Report for RegimeDiagnostics<T> {
    const KIND: &'static str = "regime-diagnostics";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FsvRfsvReport<T> {
    pub fsv: ProxyRecoveryReport<T>,
    pub rfsv: ProxyRecoveryReport<T>,
    pub fsv_diagnostics: RegimeDiagnostics<T>,
    pub rfsv_diagnostics: RegimeDiagnostics<T>,
}

impl<T: Real> Report for FsvRfsvReport<T> {
    const KIND: &'static str = "fsv-vs-rfsv";
}

/// Short- and long-lag q = 1 slopes and slope breaks of one experiment.
pub fn regime_diagnostics<T: Real>(market: &SimulatedMarket<T>, rep: &ProxyRecoveryReport<T>) -> Result<RegimeDiagnostics<T>> {
    let one = T::one();
    Ok(RegimeDiagnostics {
        log_vol_mean: mean(&market.true_log_vol),
        log_vol_variance: sample_variance(&market.true_log_vol),
        short_slope: rep.truth.fit_range(one, 1, 5)?.slope,
        long_slope: rep.truth.fit_range(one, 100, 400)?.slope,
        full_r_squared: rep.truth.fit_range(one, 1, 400)?.r_squared,
        truth_break: detect_slope_break(&rep.truth, one)?,
        realized_break: detect_slope_break(&rep.realized, one)?,
        garman_klass_break: detect_slope_break(&rep.garman_klass, one)?,
    })
}

/// The smooth mean-reverting model against its rough counterpart, same seed
/// and price settings. The scaling grid must contain q = 1.
pub fn fsv_vs_rfsv_experiment<T: Real>(
    config: &SimConfig,
    scaling: &ScalingConfig<T>,
) -> Result<(SimulatedMarket<T>, SimulatedMarket<T>, FsvRfsvReport<T>)> {
    let (fsv_m, fsv) = proxy_recovery_experiment(&FouParams::fsv_comparison(), config, scaling)?;
    let (rfsv_m, rfsv) = proxy_recovery_experiment(&FouParams::rfsv_comparison(), config, scaling)?;
    let fsv_diagnostics = regime_diagnostics(&fsv_m, &fsv)?;
    let rfsv_diagnostics = regime_diagnostics(&rfsv_m, &rfsv)?;
    Ok((
        fsv_m,
        rfsv_m,
        FsvRfsvReport {
            fsv,
            rfsv,
            fsv_diagnostics,
            rfsv_diagnostics,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseRegime {
    NoiseDominated,
    Intermediate,
    SignalDominated,
}

/// Compares the fBm increment variance nu^2 lag^{2H} with the 1/n
/// measurement noise of realized variance from n intraday observations.
pub fn noise_regime_ratio<T: Real>(nu: T, hurst: T, n_obs_per_day: T, lag: T) -> T {
    nu * nu * lag.powf(hurst + hurst) * n_obs_per_day
}

pub fn noise_regime_classify<T: Real>(nu: T, hurst: T, n_obs_per_day: T, lag: T) -> NoiseRegime {
    let r = noise_regime_ratio(nu, hurst, n_obs_per_day, lag);
    if r < T::lit(0.1) {
        NoiseRegime::NoiseDominated
    } else if r > T::lit(10.0) {
        NoiseRegime::SignalDominated
    } else {
        NoiseRegime::Intermediate
    }
}

/// log sigma_i = nu W^H_i + sqrt(1/(2n)) xi_i over consecutive days from
/// `start`. An infinite `n_obs_per_day` gives the noiseless series.
pub fn synthetic_rv_logvol<T: Real>(
    nu: T,
    hurst: T,
    n_obs_per_day: T,
    n_days: usize,
    seed: u64,
    start: NaiveDate,
) -> Result<VolSeries<T>> {
    if !(nu >= T::zero()) || !(n_obs_per_day > T::zero()) {
        return Err(Error::InvalidArgument("nu must be >= 0 and n_obs_per_day > 0".into()));
    }
    if n_days < 2 {
        return Err(Error::InvalidArgument("n_days must be >= 2".into()));
    }
    let w = simulate_fbm_with_rng(
        n_days,
        hurst,
        T::one(),
        FbmMethod::ExactCirculant,
        &mut stream_rng(seed, FBM_STREAM),
    )?;
    let noise_sd = (T::one() / (T::lit(2.0) * n_obs_per_day)).sqrt();
    let mut rng = stream_rng(seed, NOISE_STREAM);
    let x: Vec<T> = w
        .values()
        .iter()
        .map(|&wi| nu * wi + noise_sd * T::std_normal(&mut rng))
        .collect();
    let dates: Vec<NaiveDate> = start.iter_days().take(n_days).collect();
    VolSeries::from_log_vol("SYN", ProxyKind::RealizedVolatility, &dates, &x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(steps: usize, seed: u64) -> SimConfig {
        SimConfig {
            n_days: 5,
            steps_per_day: steps,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn alpha_zero_is_scaled_fbm_bitwise() {
        let p = FouParams::new(0.2, 0.4, 0.0, -3.0, -3.0).unwrap();
        let (x, w) = simulate_fou_with_driver(&p, 300, 9, FbmMethod::ExactCirculant).unwrap();
        for (xi, wi) in x.iter().zip(&w) {
            assert_eq!(*xi, -3.0 + 0.4 * wi);
        }
        assert_eq!(x[0], -3.0);
    }

    #[test]
    fn fou_recursion_matches_display() {
        let p = FouParams::new(0.1, 0.3, 0.05, -5.0, -4.0).unwrap();
        let (x, w) = simulate_fou_with_driver(&p, 50, 1, FbmMethod::ExactCirculant).unwrap();
        for n in 0..49 {
            let rhs = p.nu * (w[n + 1] - w[n]) + p.alpha * (p.mean_level - x[n]);
            assert_relative_eq!(x[n + 1] - x[n], rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_vol_keeps_price_constant() {
        let paths = simulate_intraday(&[0.0; 3], &small(50, 0)).unwrap();
        assert!(paths.days.iter().flatten().all(|&p| p == 100.0));
        assert_eq!(realized_variance(&paths.days[0]).unwrap(), 0.0);
    }

    #[test]
    fn days_chain_open_to_previous_close() {
        let paths = simulate_intraday(&[0.01, 0.02, 0.015], &small(100, 4)).unwrap();
        for w in paths.days.windows(2) {
            assert_eq!(w[1][0], *w[0].last().unwrap());
        }
        assert_eq!(paths.days[0].len(), 101);
    }

    #[test]
    fn summaries_agree_with_intraday_arrays() {
        for scheme in [PriceScheme::Euler, PriceScheme::LogEuler] {
            let cfg = SimConfig { scheme, ..small(200, 12) };
            let lv = [-4.0, -4.5, -3.8, -5.0, -4.2];
            let sig: Vec<f64> = lv.iter().map(|x: &f64| x.exp()).collect();
            let paths = simulate_intraday(&sig, &cfg).unwrap();
            let (sums, _) = simulate_day_summaries(&lv, &cfg).unwrap();
            let dates = cfg.dates();
            let ohlc = extract_ohlc("X", &paths.days, &dates).unwrap();
            for ((bar, s), prices) in ohlc.bars().iter().zip(&sums).zip(&paths.days) {
                let r = LogRange::from_bar(bar);
                let k = s.log_scale.exp();
                assert_relative_eq!(r.u, k * s.u, epsilon = 1e-9);
                assert_relative_eq!(r.d, k * s.d, epsilon = 1e-9);
                assert_relative_eq!(r.c, k * s.c, epsilon = 1e-9);
                assert_relative_eq!(realized_variance(prices).unwrap(), k * k * s.rv, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn realized_variance_examples() {
        assert_relative_eq!(realized_variance(&[100.0, 100.0 * 0.01f64.exp()]).unwrap(), 1e-4, max_relative = 1e-12);
        assert!(realized_variance(&[100.0]).is_err());
        assert!(realized_variance(&[100.0, 0.0]).is_err());
    }

    #[test]
    fn extract_ohlc_of_monotone_day() {
        let d = small(1, 0).dates();
        let s = extract_ohlc("X", &[vec![1.0, 2.0, 3.0]], &d[..1]).unwrap();
        let b = s.bars()[0];
        assert_eq!((b.open, b.high, b.low, b.close), (1.0, 3.0, 1.0, 3.0));
        assert!(extract_ohlc::<f64>("X", &[vec![]], &d[..1]).is_err());
    }

    #[test]
    fn noise_regimes() {
        // ratio = nu^2 lag^{2H} n with lag = 1
        assert_eq!(noise_regime_classify(0.1, 0.1, 1.0, 1.0), NoiseRegime::NoiseDominated);
        assert_eq!(noise_regime_classify(1.0, 0.1, 100.0, 1.0), NoiseRegime::SignalDominated);
        assert_eq!(noise_regime_classify(1.0, 0.1, 1.0, 1.0), NoiseRegime::Intermediate);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(FouParams::new(0.0, 0.3, 0.0, 0.0, 0.0).is_err());
        assert!(FouParams::new(0.1, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(FouParams::new(0.1, 0.3, -1.0, 0.0, 0.0).is_err());
        let bad = SimConfig { steps_per_day: 0, ..SimConfig::default() };
        assert!(simulate_day_summaries(&[-5.0f64], &bad).is_err());
    }

    #[test]
    fn huge_volatility_needs_log_scheme() {
        let cfg = SimConfig { n_days: 3, steps_per_day: 10, ..SimConfig::default() };
        assert!(simulate_day_summaries(&[40.0f64, 40.0, 40.0], &cfg).is_err());
        let log_cfg = SimConfig { scheme: PriceScheme::LogEuler, ..cfg };
        let (s, _) = simulate_day_summaries(&[40.0f64, 40.0, 40.0], &log_cfg).unwrap();
        assert!(s.iter().all(|d| d.log_vol(ProxyKind::RealizedVolatility).unwrap().is_finite()));
    }
}
