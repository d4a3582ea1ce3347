//! Daily variance proxies from OHLC bars, and the estimator-comparison metrics.
//!
//! All estimators assume constant volatility within the day. Variances are in
//! squared log-return units per day; volatilities are their square roots.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{OhlcBar, OhlcSeries, ProxyKind, VolPoint, VolSeries};
use crate::scalar::{mean, sample_variance, Real};

/// Intraday log-excursions relative to the open: `u = ln(H/O)`, `d = ln(L/O)`,
/// `c = ln(C/O)`. Every range estimator is a quadratic form in these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRange<T> {
    pub u: T,
    pub d: T,
    pub c: T,
}

impl<T: Real> LogRange<T> {
    pub fn from_bar(bar: &OhlcBar<T>) -> Self {
        LogRange {
            u: (bar.high / bar.open).ln(),
            d: (bar.low / bar.open).ln(),
            c: (bar.close / bar.open).ln(),
        }
    }

    pub fn parkinson(&self) -> T {
        let hl = self.u - self.d;
        hl * hl / (T::lit(4.0) * T::LN_2())
    }

    /// 0.5 (ln H/L)^2 - (2 ln 2 - 1)(ln C/O)^2.
    pub fn garman_klass_practical(&self) -> T {
        let hl = self.u - self.d;
        T::lit(0.5) * hl * hl - (T::lit(2.0) * T::LN_2() - T::one()) * self.c * self.c
    }

    pub fn garman_klass_full(&self) -> T {
        let (u, d, c) = (self.u, self.d, self.c);
        let hl = u - d;
        T::lit(0.511) * hl * hl
            - T::lit(0.019) * (c * (u + d) - T::lit(2.0) * u * d)
            - T::lit(0.383) * c * c
    }

    pub fn rogers_satchell(&self) -> T {
        self.u * (self.u - self.c) + self.d * (self.d - self.c)
    }

    pub fn open_to_close(&self) -> T {
        self.c * self.c
    }

    /// Variance proxy of the given range estimator. `None` for proxies that
    /// need more than one bar.
    pub fn variance(&self, kind: ProxyKind) -> Option<T> {
        match kind {
            ProxyKind::Parkinson => Some(self.parkinson()),
            ProxyKind::GarmanKlassPractical => Some(self.garman_klass_practical()),
            ProxyKind::GarmanKlassFull => Some(self.garman_klass_full()),
            ProxyKind::RogersSatchell => Some(self.rogers_satchell()),
            _ => None,
        }
    }
}

/// Squared close-to-close log return.
pub fn close_to_close_var<T: Real>(prev_close: T, close: T) -> Result<T> {
    if !(prev_close > T::zero()) || !(close > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "prices must be positive, got {prev_close} and {close}"
        )));
    }
    let r = (close / prev_close).ln();
    Ok(r * r)
}

pub fn parkinson_var<T: Real>(bar: &OhlcBar<T>) -> T {
    LogRange::from_bar(bar).parkinson()
}

pub fn garman_klass_practical_var<T: Real>(bar: &OhlcBar<T>) -> T {
    LogRange::from_bar(bar).garman_klass_practical()
}

pub fn garman_klass_full_var<T: Real>(bar: &OhlcBar<T>) -> T {
    LogRange::from_bar(bar).garman_klass_full()
}

pub fn rogers_satchell_var<T: Real>(bar: &OhlcBar<T>) -> T {
    LogRange::from_bar(bar).rogers_satchell()
}

/// How the close-to-close proxy forms its return.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloseToCloseMode {
    /// ln C_t - ln C_{t-1}; the first bar has no proxy.
    #[default]
    PreviousClose,
    /// ln C_t - ln O_t.
    Open,
}

/// Per-bar variance proxies, dated. Entries are `None` where the proxy is
/// undefined (first bar for close-to-close).
pub fn variance_series<T: Real>(
    series: &OhlcSeries<T>,
    proxy: ProxyKind,
    cc_mode: CloseToCloseMode,
) -> Result<Vec<(chrono::NaiveDate, Option<T>)>> {
    let bars = series.bars();
    match proxy {
        ProxyKind::CloseToClose => bars
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let v = match cc_mode {
                    CloseToCloseMode::Open => Some(close_to_close_var(b.open, b.close)?),
                    CloseToCloseMode::PreviousClose if i == 0 => None,
                    CloseToCloseMode::PreviousClose => {
                        Some(close_to_close_var(bars[i - 1].close, b.close)?)
                    }
                };
                Ok((b.date, v))
            })
            .collect(),
        kind if kind.is_range_based() => Ok(bars
            .iter()
            .map(|b| (b.date, LogRange::from_bar(b).variance(kind)))
            .collect()),
        other => Err(Error::InvalidArgument(format!(
            "{other} cannot be computed from OHLC bars"
        ))),
    }
}

/// Volatility series of one proxy: sqrt of each day's variance. Days with
/// zero (or negative, for practical Garman-Klass) variance are dropped.
pub fn proxy_series<T: Real>(series: &OhlcSeries<T>, proxy: ProxyKind) -> Result<VolSeries<T>> {
    proxy_series_with(series, proxy, CloseToCloseMode::default())
}

pub fn proxy_series_with<T: Real>(
    series: &OhlcSeries<T>,
    proxy: ProxyKind,
    cc_mode: CloseToCloseMode,
) -> Result<VolSeries<T>> {
    let vars = variance_series(series, proxy, cc_mode)?;
    let mut dropped = 0usize;
    let points: Vec<VolPoint<T>> = vars
        .into_iter()
        .filter_map(|(date, v)| match v {
            Some(v) if v > T::zero() && v.is_finite() => Some(VolPoint {
                date,
                sigma: v.sqrt(),
            }),
            Some(_) => {
                dropped += 1;
                None
            }
            None => None,
        })
        .collect();
    if dropped > 0 {
        log::warn!(
            "{}: dropped {dropped} day(s) with non-positive {proxy} variance",
            series.ticker()
        );
    }
    if points.is_empty() {
        log::warn!("{}: {proxy} series is empty", series.ticker());
        return Err(Error::InsufficientData(format!(
            "{proxy} proxy of {} is empty: every day had zero variance",
            series.ticker()
        )));
    }
    VolSeries::new(series.ticker(), proxy, points)
}

/// Accuracy of one volatility proxy against a benchmark series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProxyComparison<T> {
    /// mean (est - bench)^2
    pub mse: T,
    /// mean |est - bench|
    pub mad: T,
    /// mean (est / bench - 1)
    pub prop_bias: T,
    /// Sample standard deviation of the estimated series on the overlap.
    pub std_dev: T,
    /// Var(close-to-close variance) / Var(this variance), when supplied.
    pub efficiency: Option<T>,
    pub n_overlap: usize,
}

impl<T: Real> crate::market_data::Report for ProxyComparison<T> {
    const KIND: &'static str = "proxy-comparison";
}

/// Compares `estimated` with `benchmark` on their common dates.
pub fn compare_to_benchmark<T: Real>(
    estimated: &VolSeries<T>,
    benchmark: &VolSeries<T>,
) -> Result<ProxyComparison<T>> {
    let bench: HashMap<_, _> = benchmark.points().iter().map(|p| (p.date, p.sigma)).collect();
    let pairs: Vec<(T, T)> = estimated
        .points()
        .iter()
        .filter_map(|p| bench.get(&p.date).map(|&b| (p.sigma, b)))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "estimated and benchmark share {} date(s), need at least 2",
            pairs.len()
        )));
    }
    let n = T::from_usize_lossy(pairs.len());
    let mse = pairs.iter().map(|&(e, b)| (e - b) * (e - b)).sum::<T>() / n;
    let mad = pairs.iter().map(|&(e, b)| (e - b).abs()).sum::<T>() / n;
    let prop_bias = pairs.iter().map(|&(e, b)| e / b - T::one()).sum::<T>() / n;
    let est: Vec<T> = pairs.iter().map(|&(e, _)| e).collect();
    Ok(ProxyComparison {
        mse,
        mad,
        prop_bias,
        std_dev: sample_variance(&est).sqrt(),
        efficiency: None,
        n_overlap: pairs.len(),
    })
}

/// Var(cc_var) / Var(candidate_var).
pub fn efficiency<T: Real>(candidate_var: &[T], cc_var: &[T]) -> Result<T> {
    if candidate_var.len() != cc_var.len() || candidate_var.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "efficiency needs two equal-length series of at least 2 points, got {} and {}",
            candidate_var.len(),
            cc_var.len()
        )));
    }
    let vc = sample_variance(candidate_var);
    if !(vc > T::zero()) {
        return Err(Error::Numerical("candidate variance series has zero variance".into()));
    }
    Ok(sample_variance(cc_var) / vc)
}

/// Mean of a variance-proxy sample; convenience for Monte-Carlo checks.
pub fn mean_variance<T: Real>(vars: &[T]) -> T {
    mean(vars)
}
