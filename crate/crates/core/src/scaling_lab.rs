//! Moment scaling of log-volatility increments: m(q, D), the per-q power-law
//! fits and the Hurst estimate, plus the distributional diagnostics.

use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{write_atomic, ProxyKind, Report, VolSeries};
use crate::numerics::lstsq::{fit_line, fit_through_origin, LineFit};
use crate::scalar::{mean, sample_variance, Real};

pub const DEFAULT_Q_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];
pub const DEFAULT_MAX_LAG: i64 = 410;
pub const DEFAULT_MIN_PAIRS: usize = 30;

/// Increments `x_j - x_i` over all pairs whose dates are exactly `lag`
/// calendar days apart, ordered by `i`.
pub fn increments_at_lag<T: Real>(dates: &[NaiveDate], x: &[T], lag: i64) -> Vec<T> {
    let mut out = Vec::new();
    if lag <= 0 {
        return out;
    }
    let mut j = 0;
    for (i, d) in dates.iter().enumerate() {
        let target = *d + chrono::Duration::days(lag);
        j = j.max(i + 1);
        while j < dates.len() && dates[j] < target {
            j += 1;
        }
        if j == dates.len() {
            break;
        }
        if dates[j] == target {
            out.push(x[j] - x[i]);
        }
    }
    out
}

/// log sigma_j - log sigma_i over calendar-matched pairs at `lag` days.
pub fn log_vol_increments<T: Real>(series: &VolSeries<T>, lag: i64) -> Vec<T> {
    increments_at_lag(&series.dates(), &series.log_vol(), lag)
}

fn abs_pow_mean<T: Real>(inc: &[T], q: T) -> T {
    let n = T::from_usize_lossy(inc.len());
    let s: T = if q == T::one() {
        inc.iter().map(|v| v.abs()).sum()
    } else if q == T::lit(2.0) {
        inc.iter().map(|&v| v * v).sum()
    } else {
        inc.iter().map(|v| v.abs().powf(q)).sum()
    };
    s / n
}

/// Mean of |log-vol increment|^q over all pairs `lag` calendar days apart.
pub fn m_of_q_delta<T: Real>(series: &VolSeries<T>, q: T, lag: i64) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::InvalidArgument(format!("q must be > 0, got {q}")));
    }
    let inc = log_vol_increments(series, lag);
    if inc.is_empty() {
        return Err(Error::InsufficientData(format!("no pairs {lag} day(s) apart")));
    }
    Ok(abs_pow_mean(&inc, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingConfig<T> {
    pub q_grid: Vec<T>,
    /// Candidate lags in calendar days.
    pub lag_grid: Vec<i64>,
    /// Lags with fewer matched pairs are left out of the fits.
    pub min_pairs: usize,
}

impl<T: Real> Default for ScalingConfig<T> {
    fn default() -> Self {
        ScalingConfig {
            q_grid: DEFAULT_Q_GRID.iter().map(|&q| T::lit(q)).collect(),
            lag_grid: (1..=DEFAULT_MAX_LAG).collect(),
            min_pairs: DEFAULT_MIN_PAIRS,
        }
    }
}

impl<T: Real> ScalingConfig<T> {
    pub fn with_lags(mut self, lags: impl IntoIterator<Item = i64>) -> Self {
        self.lag_grid = lags.into_iter().collect();
        self
    }

    pub fn with_q(mut self, q: impl IntoIterator<Item = T>) -> Self {
        self.q_grid = q.into_iter().collect();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.q_grid.is_empty() || self.q_grid.iter().any(|&q| !(q > T::zero()) || !q.is_finite()) {
            return Err(Error::InvalidArgument("q grid must be nonempty and positive".into()));
        }
        if self.lag_grid.iter().any(|&l| l < 1) {
            return Err(Error::InvalidArgument("lags must be >= 1 day".into()));
        }
        if self.lag_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("lag grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// The m(q, D) surface and its log-log fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingReport<T> {
    pub ticker: String,
    pub proxy: ProxyKind,
    pub n_obs: usize,
    pub q_grid: Vec<T>,
    /// Lags that met the pair threshold, in days.
    pub lag_grid: Vec<i64>,
    pub pair_counts: Vec<usize>,
    /// `m_surface[iq][il]` is m(q_grid[iq], lag_grid[il]).
    pub m_surface: Vec<Vec<T>>,
    pub zeta: Vec<T>,
    pub zeta_se: Vec<T>,
    pub log_kq: Vec<T>,
    pub r_squared: Vec<T>,
    pub hurst: T,
    pub min_pairs: usize,
}

impl<T: Real> Report for ScalingReport<T> {
    const KIND: &'static str = "scaling";
}

impl<T: Real> ScalingReport<T> {
    pub fn q_index(&self, q: T) -> Option<usize> {
        self.q_grid.iter().position(|&g| (g - q).abs() <= T::lit(1e-9))
    }

    pub fn log_lags(&self) -> Vec<T> {
        self.lag_grid.iter().map(|&l| T::lit(l as f64).ln()).collect()
    }

    pub fn log_m(&self, iq: usize) -> Vec<T> {
        self.m_surface[iq].iter().map(|m| m.ln()).collect()
    }

    /// OLS of log m(q) on log D restricted to lags in `[lo, hi]`.
    pub fn fit_range(&self, q: T, lo: i64, hi: i64) -> Result<LineFit<T>> {
        let iq = self
            .q_index(q)
            .ok_or_else(|| Error::InvalidArgument(format!("q = {q} not in the report grid")))?;
        let (x, y): (Vec<T>, Vec<T>) = self
            .lag_grid
            .iter()
            .zip(&self.m_surface[iq])
            .filter(|(&l, _)| l >= lo && l <= hi)
            .map(|(&l, &m)| (T::lit(l as f64).ln(), m.ln()))
            .unzip();
        fit_line(&x, &y)
    }

    /// exp(log K_q) for q = 2, the fitted nu^2 of a scaled fBm.
    pub fn nu_squared(&self) -> Option<T> {
        self.q_index(T::lit(2.0)).map(|i| self.log_kq[i].exp())
    }

    /// Rows (q, log D, log m) for redrawing the log-log plots.
    pub fn curve_rows(&self) -> Vec<(T, T, T)> {
        let ll = self.log_lags();
        let mut rows = Vec::new();
        for (iq, &q) in self.q_grid.iter().enumerate() {
            for (il, &x) in ll.iter().enumerate() {
                rows.push((q, x, self.m_surface[iq][il].ln()));
            }
        }
        rows
    }
}

/// m(q, D) on raw dated log-volatility values.
pub fn fit_scaling_raw<T: Real>(
    ticker: &str,
    proxy: ProxyKind,
    dates: &[NaiveDate],
    log_vol: &[T],
    config: &ScalingConfig<T>,
) -> Result<ScalingReport<T>> {
    config.validate()?;
    if dates.len() != log_vol.len() {
        return Err(Error::InvalidArgument("dates and values differ in length".into()));
    }
    if dates.len() < 2 {
        return Err(Error::InsufficientData(format!("{} observation(s)", dates.len())));
    }
    let columns: Vec<(i64, usize, Vec<T>)> = config
        .lag_grid
        .par_iter()
        .filter_map(|&lag| {
            let inc = increments_at_lag(dates, log_vol, lag);
            (inc.len() >= config.min_pairs.max(1)).then(|| {
                let ms = config.q_grid.iter().map(|&q| abs_pow_mean(&inc, q)).collect();
                (lag, inc.len(), ms)
            })
        })
        .collect();
    if columns.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} lag(s) with at least {} pairs, need 5",
            columns.len(),
            config.min_pairs
        )));
    }
    let lag_grid: Vec<i64> = columns.iter().map(|c| c.0).collect();
    let pair_counts: Vec<usize> = columns.iter().map(|c| c.1).collect();
    let m_surface: Vec<Vec<T>> = (0..config.q_grid.len())
        .map(|iq| columns.iter().map(|c| c.2[iq]).collect())
        .collect();
    if m_surface.iter().flatten().any(|&m| !(m > T::zero())) {
        return Err(Error::DegenerateRegression(
            "zero moment at some lag; log-volatility has repeated values".into(),
        ));
    }
    let log_lags: Vec<T> = lag_grid.iter().map(|&l| T::lit(l as f64).ln()).collect();
    let mut zeta = Vec::new();
    let mut zeta_se = Vec::new();
    let mut log_kq = Vec::new();
    let mut r_squared = Vec::new();
    for row in &m_surface {
        let y: Vec<T> = row.iter().map(|m| m.ln()).collect();
        let f = fit_line(&log_lags, &y)?;
        zeta.push(f.slope);
        zeta_se.push(f.slope_se);
        log_kq.push(f.intercept);
        r_squared.push(f.r_squared);
    }
    let hurst = fit_through_origin(&config.q_grid, &zeta)?;
    Ok(ScalingReport {
        ticker: ticker.to_string(),
        proxy,
        n_obs: dates.len(),
        q_grid: config.q_grid.clone(),
        lag_grid,
        pair_counts,
        m_surface,
        zeta,
        zeta_se,
        log_kq,
        r_squared,
        hurst,
        min_pairs: config.min_pairs,
    })
}

pub fn fit_scaling<T: Real>(series: &VolSeries<T>, config: &ScalingConfig<T>) -> Result<ScalingReport<T>> {
    fit_scaling_raw(
        series.ticker(),
        series.proxy(),
        &series.dates(),
        &series.log_vol(),
        config,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SplitHurst<T> {
    pub full: T,
    pub first_half: T,
    pub second_half: T,
    /// Date at which the second half starts.
    pub split_date: NaiveDate,
}

impl<T: Real> Report for SplitHurst<T> {
    const KIND: &'static str = "split-hurst";
}

/// H on the whole series and on its two contiguous halves, same lag grid.
pub fn split_period_hurst<T: Real>(series: &VolSeries<T>, config: &ScalingConfig<T>) -> Result<SplitHurst<T>> {
    let n = series.len();
    if n < 200 {
        return Err(Error::InsufficientData(format!(
            "split-period analysis needs 200 observations, got {n}"
        )));
    }
    let mid = n / 2;
    let full = fit_scaling(series, config)?.hurst;
    let first_half = fit_scaling(&series.slice(0, mid), config)?.hurst;
    let second_half = fit_scaling(&series.slice(mid, n), config)?.hurst;
    Ok(SplitHurst {
        full,
        first_half,
        second_half,
        split_date: series.points()[mid].date,
    })
}

/// Histogram of log-volatility increments at one lag with Gaussian fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IncrementHistogram<T> {
    pub lag: i64,
    pub bin_edges: Vec<T>,
    pub counts: Vec<usize>,
    pub mean: T,
    pub std: T,
    pub excess_kurtosis: T,
    /// Std of the 1-day increments times lag^H.
    pub rescaled_std: T,
    pub hurst: T,
}

impl<T: Real> Report for IncrementHistogram<T> {
    const KIND: &'static str = "increment-histogram";
}

fn normal_pdf<T: Real>(x: T, mu: T, sd: T) -> T {
    let z = (x - mu) / sd;
    (-(z * z) * T::lit(0.5)).exp() / (sd * (T::PI() + T::PI()).sqrt())
}

impl<T: Real> IncrementHistogram<T> {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Rows (left, right, empirical density, normal-fit density, rescaled 1-day density)
    /// evaluated at bin centres.
    pub fn density_rows(&self) -> Vec<[T; 5]> {
        let n = T::from_usize_lossy(self.total());
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (lo, hi) = (self.bin_edges[i], self.bin_edges[i + 1]);
                let mid = T::lit(0.5) * (lo + hi);
                [
                    lo,
                    hi,
                    T::from_usize_lossy(c) / (n * (hi - lo)),
                    normal_pdf(mid, self.mean, self.std),
                    normal_pdf(mid, self.mean, self.rescaled_std),
                ]
            })
            .collect()
    }
}

pub fn increment_distribution<T: Real>(
    series: &VolSeries<T>,
    lag: i64,
    hurst: T,
    bins: usize,
) -> Result<IncrementHistogram<T>> {
    let inc = log_vol_increments(series, lag);
    let one_day = log_vol_increments(series, 1);
    histogram_of(&inc, &one_day, lag, hurst, bins)
}

pub(crate) fn histogram_of<T: Real>(
    inc: &[T],
    one_day: &[T],
    lag: i64,
    hurst: T,
    bins: usize,
) -> Result<IncrementHistogram<T>> {
    if inc.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "{} increments at lag {lag}, need 100",
            inc.len()
        )));
    }
    if one_day.len() < 2 {
        return Err(Error::InsufficientData("fewer than two 1-day increments".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be >= 1".into()));
    }
    let mu = mean(inc);
    let var = sample_variance(inc);
    let sd = var.sqrt();
    let n = T::from_usize_lossy(inc.len());
    let m4 = inc.iter().map(|&v| (v - mu).powi(4)).sum::<T>() / n;
    let m2 = inc.iter().map(|&v| (v - mu).powi(2)).sum::<T>() / n;
    let excess_kurtosis = m4 / (m2 * m2) - T::lit(3.0);

    let lo = inc.iter().copied().fold(T::infinity(), T::min);
    let hi = inc.iter().copied().fold(T::neg_infinity(), T::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - T::lit(0.5), hi + T::lit(0.5)) };
    let width = (hi - lo) / T::from_usize_lossy(bins);
    let bin_edges: Vec<T> = (0..=bins).map(|i| lo + width * T::from_usize_lossy(i)).collect();
    let mut counts = vec![0usize; bins];
    for &v in inc {
        let k = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[k] += 1;
    }
    let rescaled_std = sample_variance(one_day).sqrt() * T::lit(lag as f64).powf(hurst);
    Ok(IncrementHistogram {
        lag,
        bin_edges,
        counts,
        mean: mu,
        std: sd,
        excess_kurtosis,
        rescaled_std,
        hurst,
    })
}

/// Two-segment fit of a log-log curve: the break minimizing total squared error,
/// with at least three points on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SlopeBreak<T> {
    /// First lag of the right-hand segment.
    pub break_lag: i64,
    pub slope_before: T,
    pub slope_after: T,
    pub single_slope: T,
    pub single_r_squared: T,
    /// SSE of the two-segment fit over SSE of the single line.
    pub sse_ratio: T,
}

fn sse<T: Real>(x: &[T], y: &[T], f: &LineFit<T>) -> T {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - f.intercept - f.slope * a;
            r * r
        })
        .sum()
}

pub fn detect_slope_break<T: Real>(report: &ScalingReport<T>, q: T) -> Result<SlopeBreak<T>> {
    let iq = report
        .q_index(q)
        .ok_or_else(|| Error::InvalidArgument(format!("q = {q} not in the report grid")))?;
    let x = report.log_lags();
    let y = report.log_m(iq);
    let n = x.len();
    if n < 6 {
        return Err(Error::InsufficientData(format!("{n} lags, need 6 for a break search")));
    }
    let single = fit_line(&x, &y)?;
    let sse_single = sse(&x, &y, &single);
    let mut best: Option<(T, usize, T, T)> = None;
    for k in 3..=n - 3 {
        let (Ok(a), Ok(b)) = (fit_line(&x[..k], &y[..k]), fit_line(&x[k..], &y[k..])) else {
            continue;
        };
        let total = sse(&x[..k], &y[..k], &a) + sse(&x[k..], &y[k..], &b);
        if best.as_ref().is_none_or(|bst| total < bst.0) {
            best = Some((total, k, a.slope, b.slope));
        }
    }
    let (total, k, before, after) =
        best.ok_or_else(|| Error::DegenerateRegression("no admissible break point".into()))?;
    Ok(SlopeBreak {
        break_lag: report.lag_grid[k],
        slope_before: before,
        slope_after: after,
        single_slope: single.slope,
        single_r_squared: single.r_squared,
        sse_ratio: if sse_single > T::zero() { total / sse_single } else { T::one() },
    })
}

fn write_csv_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "{header}").map_err(|e| Error::io(path, e))?;
    for r in rows {
        writeln!(buf, "{r}").map_err(|e| Error::io(path, e))?;
    }
    write_atomic(path, &buf)
}

/// Writes `q,log_delta,log_m`.
pub fn write_curves_csv<T: Real>(report: &ScalingReport<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv_rows(
        path.as_ref(),
        "q,log_delta,log_m",
        report.curve_rows().into_iter().map(|(q, x, y)| format!("{q},{x},{y}")),
    )
}

/// Writes `q,zeta`.
pub fn write_zeta_csv<T: Real>(report: &ScalingReport<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv_rows(
        path.as_ref(),
        "q,zeta",
        report.q_grid.iter().zip(&report.zeta).map(|(q, z)| format!("{q},{z}")),
    )
}

/// Writes `bin_left,bin_right,density,normal_fit,rescaled_fit`.
pub fn write_histogram_csv<T: Real>(hist: &IncrementHistogram<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv_rows(
        path.as_ref(),
        "bin_left,bin_right,density,normal_fit,rescaled_fit",
        hist.density_rows()
            .into_iter()
            .map(|r| format!("{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4])),
    )
}
