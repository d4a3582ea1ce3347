//! Direct multi-step AR(p) and HAR regressions on a rolling window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::lstsq::{ols, OlsFit};
use crate::scalar::Real;

pub const DEFAULT_WINDOW: usize = 500;

/// A fitted direct forecast: `fit.coef[0]` is the intercept K_0, the rest
/// multiply the regressors in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinearForecast<T> {
    pub fit: OlsFit<T>,
    pub prediction: T,
}

fn check_window(len: usize, window: usize, need: usize) -> Result<()> {
    if window < 50 {
        return Err(Error::InvalidArgument(format!("window must be >= 50, got {window}")));
    }
    if len < window {
        return Err(Error::InsufficientData(format!(
            "{len} observations, window needs {window}"
        )));
    }
    if window <= need {
        return Err(Error::InsufficientData(format!(
            "window {window} too short for {need} lags plus horizon"
        )));
    }
    Ok(())
}

/// Regression of y_{tau + horizon} on the regressors built at tau, over the
/// last `window` observations of `history`, then applied at the last point.
fn direct_forecast<T: Real, F: Fn(&[T], usize) -> Vec<T>>(
    history: &[T],
    horizon: usize,
    window: usize,
    max_lag: usize,
    regressors: F,
) -> Result<LinearForecast<T>> {
    if horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    check_window(history.len(), window, max_lag + horizon)?;
    let t = history.len() - 1;
    let first = history.len() - window + max_lag;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for tau in first..=t - horizon {
        rows.push(regressors(history, tau));
        y.push(history[tau + horizon]);
    }
    let window_values = &history[history.len() - window..];
    if window_values.iter().all(|&v| v == window_values[0]) {
        // Every regressor equals the target: the fit is not identified, but
        // any solution predicts the constant.
        let k = rows[0].len() + 1;
        let mut coef = vec![T::zero(); k];
        coef[0] = window_values[0];
        return Ok(LinearForecast {
            fit: OlsFit {
                coef,
                std_err: vec![T::zero(); k],
                sigma2: T::zero(),
                n: rows.len(),
            },
            prediction: window_values[0],
        });
    }
    let fit = ols(&rows, &y, true)?;
    let prediction = fit.predict(&regressors(history, t), true);
    Ok(LinearForecast { fit, prediction })
}

/// K_0 + sum_{i=0}^{p} C_i y_{t-i}: `p + 1` lagged values, fitted directly on
/// the `horizon`-ahead target.
pub fn ar_fit_predict<T: Real>(history: &[T], p: usize, horizon: usize, window: usize) -> Result<LinearForecast<T>> {
    if p < 1 {
        return Err(Error::InvalidArgument("AR order must be >= 1".into()));
    }
    direct_forecast(history, horizon, window, p, |h, tau| (0..=p).map(|i| h[tau - i]).collect())
}

fn trailing_mean<T: Real>(h: &[T], tau: usize, len: usize) -> T {
    h[tau + 1 - len..=tau].iter().copied().sum::<T>() / T::from_usize_lossy(len)
}

/// K_0 + C_d y_t + C_w mean(y_{t-4..t}) + C_m mean(y_{t-19..t}).
pub fn har_fit_predict<T: Real>(history: &[T], horizon: usize, window: usize) -> Result<LinearForecast<T>> {
    direct_forecast(history, horizon, window, 19, |h, tau| {
        vec![h[tau], trailing_mean(h, tau, 5), trailing_mean(h, tau, 20)]
    })
}
