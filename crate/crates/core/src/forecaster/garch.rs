//! GARCH(1,1): Gaussian quasi-maximum likelihood and the multi-step variance
//! forecast.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::optimize::NelderMead;
use crate::rng::stream_rng;
use crate::scalar::{mean, sample_variance, Real};

/// h_t = omega + alpha e_{t-1}^2 + beta h_{t-1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GarchParams<T> {
    pub omega: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> GarchParams<T> {
    pub fn persistence(&self) -> T {
        self.alpha + self.beta
    }

    /// omega / (1 - alpha - beta).
    pub fn long_run_variance(&self) -> Option<T> {
        (self.persistence() < T::one()).then(|| self.omega / (T::one() - self.persistence()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero()) || !(self.alpha >= T::zero()) || !(self.beta >= T::zero()) {
            return Err(Error::InvalidArgument("GARCH needs omega > 0 and alpha, beta >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GarchFit<T> {
    pub params: GarchParams<T>,
    /// Negative Gaussian log-likelihood (without the constant).
    pub neg_log_lik: T,
    pub converged: bool,
}

/// omega (1 + sum_{i=1}^{D-1} phi^i) + phi^D sigma_t^2 with phi = alpha + beta.
pub fn garch_forecast<T: Real>(params: &GarchParams<T>, sigma2_t: T, horizon: usize) -> T {
    let phi = params.persistence();
    let mut geo = T::one();
    let mut pow = T::one();
    for _ in 1..horizon {
        pow = pow * phi;
        geo = geo + pow;
    }
    params.omega * geo + pow * phi * sigma2_t
}

/// Half the Gaussian negative log-likelihood of demeaned returns, with the
/// recursion started at the sample variance.
pub fn garch_neg_log_lik<T: Real>(params: &GarchParams<T>, resid: &[T], h1: T) -> T {
    let mut h = h1;
    let mut nll = T::zero();
    for (i, &e) in resid.iter().enumerate() {
        if i > 0 {
            let prev = resid[i - 1];
            h = params.omega + params.alpha * prev * prev + params.beta * h;
        }
        if !(h > T::zero()) {
            return T::infinity();
        }
        nll = nll + h.ln() + e * e / h;
    }
    T::lit(0.5) * nll
}

fn logistic<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn logit<T: Real>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

/// theta = (ln omega, logit(alpha + beta), logit(alpha / (alpha + beta))).
fn from_theta<T: Real>(theta: &[T]) -> GarchParams<T> {
    let p = logistic(theta[1]);
    let s = logistic(theta[2]);
    GarchParams {
        omega: theta[0].exp(),
        alpha: p * s,
        beta: p * (T::one() - s),
    }
}

fn to_theta<T: Real>(g: &GarchParams<T>) -> Vec<T> {
    let tiny = T::lit(1e-6);
    let p = g.persistence().max(tiny).min(T::one() - tiny);
    let s = (g.alpha / g.persistence().max(tiny)).max(tiny).min(T::one() - tiny);
    vec![g.omega.ln(), logit(p), logit(s)]
}

/// Gaussian QMLE on `returns` (demeaned internally) with omega > 0,
/// alpha, beta >= 0 and alpha + beta < 1. Several starting points are tried,
/// plus `warm` when given.
pub fn fit_garch<T: Real>(returns: &[T], warm: Option<&GarchParams<T>>) -> Result<GarchFit<T>> {
    if returns.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "GARCH fit needs 50 returns, got {}",
            returns.len()
        )));
    }
    let mu = mean(returns);
    let resid: Vec<T> = returns.iter().map(|&r| r - mu).collect();
    let var = sample_variance(&resid);
    if !(var > T::zero()) {
        return Err(Error::DegenerateRegression("returns have zero variance".into()));
    }
    let objective = |theta: &[T]| garch_neg_log_lik(&from_theta(theta), &resid, var);
    let mut starts: Vec<Vec<T>> = Vec::new();
    if let Some(w) = warm {
        starts.push(to_theta(w));
    }
    for &(p, s) in &[(0.95, 0.08), (0.8, 0.2), (0.5, 0.3), (0.98, 0.05)] {
        let p = T::lit(p);
        let s = T::lit(s);
        let g = GarchParams {
            omega: var * (T::one() - p),
            alpha: p * s,
            beta: p * (T::one() - s),
        };
        starts.push(to_theta(&g));
    }
    let nm = NelderMead {
        max_iter: 3000,
        f_tol: T::lit(1e-10),
        x_tol: T::lit(1e-7),
        initial_step: T::lit(0.5),
    };
    let mut best: Option<(GarchParams<T>, T, bool)> = None;
    for s in &starts {
        // A restart from the first optimum guards against simplex collapse.
        let first = nm.minimize(objective, s);
        let m = nm.minimize(objective, &first.x);
        let candidate = (from_theta(&m.x), m.value, m.converged);
        if m.value.is_finite() && best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some(candidate);
        }
    }
    let (params, neg_log_lik, converged) =
        best.ok_or_else(|| Error::Optimizer("GARCH likelihood is not finite at any start".into()))?;
    if !converged {
        return Err(Error::Optimizer("GARCH QMLE did not converge".into()));
    }
    Ok(GarchFit {
        params,
        neg_log_lik,
        converged,
    })
}

/// Returns e_t = sqrt(h_t) z_t, started at the long-run variance, after a
/// burn-in of 500 discarded draws.
pub fn simulate_garch<T: Real>(params: &GarchParams<T>, n: usize, seed: u64) -> Result<Vec<T>> {
    params.validate()?;
    let h0 = params
        .long_run_variance()
        .ok_or_else(|| Error::InvalidArgument("GARCH simulation needs alpha + beta < 1".into()))?;
    let mut rng = stream_rng(seed, 0);
    let mut h = h0;
    let mut out = Vec::with_capacity(n);
    let burn = 500;
    for i in 0..n + burn {
        let e = h.sqrt() * T::std_normal(&mut rng);
        if i >= burn {
            out.push(e);
        }
        h = params.omega + params.alpha * e * e + params.beta * h;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(omega: f64, alpha: f64, beta: f64) -> GarchParams<f64> {
        GarchParams { omega, alpha, beta }
    }

    #[test]
    fn forecast_edge_cases() {
        assert_eq!(garch_forecast(&p(2e-6, 0.0, 0.0), 5e-4, 1), 2e-6);
        assert_eq!(garch_forecast(&p(2e-6, 0.0, 0.0), 5e-4, 7), 2e-6);
        assert_relative_eq!(garch_forecast(&p(1e-6, 0.1, 0.8), 4e-4, 1), 1e-6 + 0.9 * 4e-4, max_relative = 1e-14);
    }

    #[test]
    fn forecast_tends_to_long_run_variance() {
        let g = p(1e-6, 0.08, 0.9);
        let lr = g.long_run_variance().unwrap();
        assert_relative_eq!(garch_forecast(&g, 1e-3, 2000), lr, max_relative = 1e-10);
    }

    #[test]
    fn theta_round_trip() {
        let g = p(3e-6, 0.07, 0.91);
        let back = from_theta(&to_theta(&g));
        assert_relative_eq!(back.omega, g.omega, max_relative = 1e-12);
        assert_relative_eq!(back.alpha, g.alpha, max_relative = 1e-9);
        assert_relative_eq!(back.beta, g.beta, max_relative = 1e-9);
    }

    #[test]
    fn fit_is_stationary_and_beats_starts() {
        let g = p(1e-6, 0.08, 0.9);
        let r = simulate_garch(&g, 1500, 3).unwrap();
        let f = fit_garch(&r, None).unwrap();
        assert!(f.params.persistence() < 1.0);
        assert!(f.params.omega > 0.0);
        let var = sample_variance(&r);
        let m = mean(&r);
        let resid: Vec<f64> = r.iter().map(|x| x - m).collect();
        assert!(f.neg_log_lik <= garch_neg_log_lik(&g, &resid, var) + 1e-9);
    }

    #[test]
    fn short_or_flat_returns_rejected() {
        assert!(fit_garch(&[0.01f64; 10], None).is_err());
        assert!(fit_garch(&[0.01f64; 100], None).is_err());
    }
}
