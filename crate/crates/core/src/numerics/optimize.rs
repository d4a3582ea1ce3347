//! Nelder-Mead simplex minimization and bracketed bisection.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead<T> {
    pub max_iter: usize,
    /// Stop when the simplex's function-value spread is below this.
    pub f_tol: T,
    /// and its largest vertex distance from the best vertex is below this.
    pub x_tol: T,
    pub initial_step: T,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        NelderMead {
            max_iter: 2000,
            f_tol: T::lit(1e-10),
            x_tol: T::lit(1e-8),
            initial_step: T::lit(0.5),
        }
    }
}

impl<T: Real> NelderMead<T> {
    pub fn minimize<F: FnMut(&[T]) -> T>(&self, mut f: F, start: &[T]) -> Minimum<T> {
        let n = start.len();
        let eval = |f: &mut F, x: &[T]| {
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
        let v0 = eval(&mut f, start);
        simplex.push((start.to_vec(), v0));
        for i in 0..n {
            let mut x = start.to_vec();
            x[i] = x[i] + self.initial_step;
            let v = eval(&mut f, &x);
            simplex.push((x, v));
        }
        let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let spread = (worst - best).abs();
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (*a - *b).abs())
                        .fold(T::zero(), T::max)
                })
                .fold(T::zero(), T::max);
            if spread <= self.f_tol * (T::one() + best.abs()) && size <= self.x_tol {
                converged = true;
                break;
            }
            let centroid: Vec<T> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<T>() / T::from_usize_lossy(n))
                .collect();
            let along = |t: T| -> Vec<T> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(&c, &w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(alpha);
            let fr = eval(&mut f, &xr);
            if fr < simplex[0].1 {
                let xe = along(gamma);
                let fe = eval(&mut f, &xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(rho);
                    let fc = eval(&mut f, &xc);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = eval(&mut f, &xc);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        let x: Vec<T> = x0.iter().zip(&v.0).map(|(&b, &p)| b + sigma * (p - b)).collect();
                        let fx = eval(&mut f, &x);
                        *v = (x, fx);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            converged,
        }
    }
}

/// Root of a monotone `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must
/// have opposite signs.
pub fn bisect<T: Real, F: Fn(T) -> Result<T>>(f: F, mut lo: T, mut hi: T, tol: T) -> Result<T> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if (hi - lo) <= tol * (T::one() + mid.abs()) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_iter: 10_000,
            f_tol: 1e-14,
            x_tol: 1e-10,
            initial_step: 0.5,
        };
        let m = nm.minimize(|x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0]);
        assert!(m.converged);
        assert_relative_eq!(m.x[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(m.x[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn bisection_sqrt2() {
        let r = bisect(|x: f64| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, max_relative = 1e-13);
        assert!(bisect(|x: f64| Ok(x * x + 1.0), 0.0, 2.0, 1e-12).is_err());
    }
}
