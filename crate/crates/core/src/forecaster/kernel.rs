//! Fractional kernel predictor of log-variance.
//!
//! E[log s2_{t+D} | F_t] = (cos(H pi) / pi) int_0^inf log s2_{t - D u} k(u) du with
//! k(u) = u^{-H-1/2} / (1 + u). Each past observation holds its value back to
//! the previous observation, so its weight is the exact kernel mass of its
//! cell in u-space.

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{calendar_lag, VolSeries};
use crate::numerics::optimize::bisect;
use crate::numerics::quadrature::integrate;
use crate::numerics::special::gamma;
use crate::scalar::Real;

pub const DEFAULT_EPSILON: f64 = 0.1;

fn check_rough<T: Real>(hurst: T) -> Result<()> {
    if hurst > T::zero() && hurst < T::lit(0.5) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "kernel predictor needs H in (0, 1/2), got {hurst}"
        )))
    }
}

/// u^{-H-1/2} / (1 + u).
pub fn kernel_density<T: Real>(u: T, hurst: T) -> T {
    u.powf(-(hurst + T::lit(0.5))) / (T::one() + u)
}

/// int_0^inf k(u) du = pi / cos(H pi).
pub fn kernel_total_mass<T: Real>(hurst: T) -> T {
    T::PI() / (T::PI() * hurst).cos()
}

const QUAD_TOL: f64 = 1e-14;

/// int_0^x k(u) du for x <= 1, after w = u^{1/2 - H}, which removes the
/// singularity at 0.
fn head_mass<T: Real>(x: T, hurst: T) -> Result<T> {
    let b = T::lit(0.5) - hurst;
    let inv_b = T::one() / b;
    integrate(|w: T| inv_b / (T::one() + w.powf(inv_b)), T::zero(), x.powf(b), T::lit(QUAD_TOL))
}

/// int_x^inf k(u) du for x >= 1, after s = 1/u and w = s^{H + 1/2}.
fn tail_mass_raw<T: Real>(x: T, hurst: T) -> Result<T> {
    let a = hurst + T::lit(0.5);
    let inv_a = T::one() / a;
    integrate(|w: T| inv_a / (T::one() + w.powf(inv_a)), T::zero(), x.powf(-a), T::lit(QUAD_TOL))
}

/// int_0^x k(u) du.
pub fn kernel_cdf<T: Real>(x: T, hurst: T) -> Result<T> {
    check_rough(hurst)?;
    if !(x >= T::zero()) {
        return Err(Error::InvalidArgument(format!("kernel argument must be >= 0, got {x}")));
    }
    if x <= T::one() {
        head_mass(x, hurst)
    } else if x.is_infinite() {
        Ok(kernel_total_mass(hurst))
    } else {
        Ok(kernel_total_mass(hurst) - tail_mass_raw(x, hurst)?)
    }
}

/// int_r^inf k(u) du, optionally multiplied by cos(H pi) / pi so that it is
/// the fraction of the total weight beyond r.
pub fn tail_mass<T: Real>(r: T, hurst: T, normalized: bool) -> Result<T> {
    check_rough(hurst)?;
    let raw = if r >= T::one() {
        tail_mass_raw(r, hurst)?
    } else {
        kernel_total_mass(hurst) - head_mass(r.max(T::zero()), hurst)?
    };
    Ok(if normalized {
        raw / kernel_total_mass(hurst)
    } else {
        raw
    })
}

/// Smallest r whose normalized tail mass is at most `epsilon`, i.e. the
/// history depth in units of the horizon that carries all but `epsilon` of
/// the kernel weight.
pub fn truncation_radius<T: Real>(epsilon: T, hurst: T) -> Result<T> {
    check_rough(hurst)?;
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let g = |log_r: T| tail_mass(log_r.exp(), hurst, true).map(|t| t - epsilon);
    let mut lo = T::zero();
    while g(lo)? <= T::zero() {
        lo = lo - T::lit(4.0);
        if lo < T::lit(-60.0) {
            return Ok(lo.exp());
        }
    }
    let mut hi = T::zero();
    while g(hi)? > T::zero() {
        hi = hi + T::lit(4.0);
        if hi > T::lit(200.0) {
            return Err(Error::Numerical(format!("no truncation radius for epsilon = {epsilon}")));
        }
    }
    bisect(g, lo, hi, T::lit(1e-12)).map(T::exp)
}

/// c = Gamma(3/2 - H) / (Gamma(H + 1/2) Gamma(2 - 2H)); Var[W_{t+D} | F_t] = c D^{2H}.
pub fn variance_correction_c<T: Real>(hurst: T) -> T {
    gamma(T::lit(1.5) - hurst) / (gamma(hurst + T::lit(0.5)) * gamma(T::lit(2.0) - hurst - hurst))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RfsvPredictorConfig<T> {
    pub hurst: T,
    /// Forecast horizon in calendar days.
    pub horizon: i64,
    pub epsilon: T,
    /// Needed for variance forecasts only.
    pub nu_squared: Option<T>,
}

impl<T: Real> RfsvPredictorConfig<T> {
    pub fn new(hurst: T, horizon: i64) -> Self {
        RfsvPredictorConfig {
            hurst,
            horizon,
            epsilon: T::lit(DEFAULT_EPSILON),
            nu_squared: None,
        }
    }

    fn validate(&self) -> Result<()> {
        check_rough(self.hurst)?;
        if self.horizon < 1 {
            return Err(Error::InvalidArgument(format!("horizon must be >= 1 day, got {}", self.horizon)));
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Kernel mass tabulated at whole calendar days for one (H, horizon, epsilon).
#[derive(Debug, Clone)]
pub struct KernelTable<T> {
    hurst: T,
    horizon: T,
    /// Truncation depth in calendar days (at least one).
    depth: T,
    /// `cdf[L]` = kernel mass on [0, L / horizon].
    cdf: Vec<T>,
    cdf_depth: T,
}

impl<T: Real> KernelTable<T> {
    pub fn new(config: &RfsvPredictorConfig<T>) -> Result<Self> {
        config.validate()?;
        let horizon = T::lit(config.horizon as f64);
        let r = truncation_radius(config.epsilon, config.hurst)?;
        let depth = (r * horizon).max(T::one());
        let whole = depth.floor().to_usize().unwrap_or(0);
        let cdf = (0..=whole)
            .map(|l| kernel_cdf(T::from_usize_lossy(l) / horizon, config.hurst))
            .collect::<Result<Vec<_>>>()?;
        let cdf_depth = kernel_cdf(depth / horizon, config.hurst)?;
        Ok(KernelTable {
            hurst: config.hurst,
            horizon,
            depth,
            cdf,
            cdf_depth,
        })
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    /// Truncation depth in calendar days.
    pub fn depth_days(&self) -> T {
        self.depth
    }

    fn cdf_at(&self, days: i64) -> T {
        let d = T::lit(days as f64);
        if d >= self.depth {
            self.cdf_depth
        } else {
            self.cdf[days as usize]
        }
    }

    /// Normalized weights for observations at calendar lags `lags` before the
    /// forecast origin (ascending, starting at 0). Returns one weight per
    /// observation used; older observations beyond the depth get none.
    pub fn weights(&self, lags: &[i64]) -> Result<Vec<T>> {
        if lags.first() != Some(&0) {
            return Err(Error::InvalidArgument("history must end at the forecast date".into()));
        }
        let mut w = Vec::new();
        for (j, &l) in lags.iter().enumerate() {
            if T::lit(l as f64) >= self.depth {
                break;
            }
            let next = lags.get(j + 1).copied().unwrap_or(l + 1);
            if T::lit(next as f64) < self.depth && j + 1 == lags.len() {
                return Err(Error::InsufficientData(format!(
                    "history covers {} calendar days, kernel needs {}",
                    next,
                    self.depth.ceil()
                )));
            }
            w.push(self.cdf_at(next) - self.cdf_at(l));
        }
        let total = self.cdf_depth;
        Ok(w.into_iter().map(|x| x / total).collect())
    }

    /// Weighted average of `values` (oldest first, last = forecast origin)
    /// observed on `dates`.
    pub fn predict(&self, dates: &[NaiveDate], values: &[T]) -> Result<T> {
        let n = dates.len();
        if n == 0 || n != values.len() {
            return Err(Error::InsufficientData("empty or misaligned history".into()));
        }
        let t = dates[n - 1];
        let mut lags = Vec::new();
        for &d in dates.iter().rev() {
            let l = if d == t { 0 } else { calendar_lag(d, t)? };
            lags.push(l);
            if T::lit(l as f64) >= self.depth {
                break;
            }
        }
        let w = self.weights(&lags)?;
        Ok(w.iter()
            .zip(values.iter().rev())
            .map(|(&wi, &v)| wi * v)
            .sum())
    }

    pub fn horizon_days(&self) -> T {
        self.horizon
    }
}

/// Normalized kernel weights aligned with `history_dates` (oldest first; the
/// last date is the forecast origin). Observations beyond the truncation
/// depth get weight 0.
pub fn rfsv_weights<T: Real>(
    config: &RfsvPredictorConfig<T>,
    history_dates: &[NaiveDate],
) -> Result<Vec<T>> {
    let table = KernelTable::new(config)?;
    let n = history_dates.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty history".into()));
    }
    let t = history_dates[n - 1];
    let lags = history_dates
        .iter()
        .rev()
        .map(|&d| if d == t { Ok(0) } else { calendar_lag(d, t) })
        .collect::<Result<Vec<_>>>()?;
    let w = table.weights(&lags)?;
    let mut out = vec![T::zero(); n];
    for (j, wj) in w.into_iter().enumerate() {
        out[n - 1 - j] = wj;
    }
    Ok(out)
}

fn history_up_to<T: Real>(history: &VolSeries<T>, t: NaiveDate) -> Result<(Vec<NaiveDate>, Vec<T>)> {
    let k = history.points().partition_point(|p| p.date <= t);
    if k == 0 {
        return Err(Error::InsufficientData(format!("no observations on or before {t}")));
    }
    let pts = &history.points()[..k];
    Ok((
        pts.iter().map(|p| p.date).collect(),
        pts.iter().map(|p| T::lit(2.0) * p.sigma.ln()).collect(),
    ))
}

/// Forecast of log sigma^2 at `t + horizon` from observations dated <= `t`.
pub fn predict_log_variance<T: Real>(
    history: &VolSeries<T>,
    config: &RfsvPredictorConfig<T>,
    t: NaiveDate,
) -> Result<T> {
    let (dates, y) = history_up_to(history, t)?;
    KernelTable::new(config)?.predict(&dates, &y)
}

/// exp(log-variance forecast + 2 c nu^2 horizon^{2H}).
pub fn predict_variance<T: Real>(
    history: &VolSeries<T>,
    config: &RfsvPredictorConfig<T>,
    t: NaiveDate,
) -> Result<T> {
    let nu2 = config
        .nu_squared
        .ok_or_else(|| Error::InvalidArgument("variance forecast needs nu_squared".into()))?;
    let lv = predict_log_variance(history, config, t)?;
    Ok(variance_from_log(lv, config.hurst, nu2, T::lit(config.horizon as f64)))
}

pub fn variance_from_log<T: Real>(log_var: T, hurst: T, nu_squared: T, horizon: T) -> T {
    let corr = T::lit(2.0) * variance_correction_c(hurst) * nu_squared * horizon.powf(hurst + hurst);
    (log_var + corr).exp()
}

/// Kernel tables keyed by calendar horizon, for backtests where the calendar
/// distance to the target varies with weekends and holidays.
#[derive(Debug, Default)]
pub struct KernelCache<T> {
    hurst: T,
    epsilon: T,
    tables: HashMap<i64, KernelTable<T>>,
}

impl<T: Real> KernelCache<T> {
    pub fn new(hurst: T, epsilon: T) -> Self {
        KernelCache {
            hurst,
            epsilon,
            tables: HashMap::new(),
        }
    }

    pub fn table(&mut self, horizon: i64) -> Result<&KernelTable<T>> {
        if !self.tables.contains_key(&horizon) {
            let cfg = RfsvPredictorConfig {
                hurst: self.hurst,
                horizon,
                epsilon: self.epsilon,
                nu_squared: None,
            };
            self.tables.insert(horizon, KernelTable::new(&cfg)?);
        }
        Ok(&self.tables[&horizon])
    }
}
