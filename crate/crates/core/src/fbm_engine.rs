//! Fractional Brownian motion: analytic moments and path synthesis.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{gamma, gaussian_abs_moment};
use crate::rng::stream_rng;
use crate::scalar::Real;

fn check_hurst<T: Real>(hurst: T) -> Result<()> {
    if hurst > T::zero() && hurst < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Hurst exponent must lie in (0, 1), got {hurst}"
        )))
    }
}

/// Cov(W_t, W_s) = (|t|^{2H} + |s|^{2H} - |t - s|^{2H}) / 2.
pub fn fbm_covariance<T: Real>(t: T, s: T, hurst: T) -> Result<T> {
    check_hurst(hurst)?;
    let h2 = hurst + hurst;
    Ok(T::lit(0.5) * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2)))
}

/// Autocovariance at lag `k` of fBm increments over a grid of spacing `step`.
pub fn fgn_autocovariance<T: Real>(k: usize, hurst: T, step: T) -> T {
    let h2 = hurst + hurst;
    let kf = T::from_usize_lossy(k);
    let core = if k == 0 {
        T::one()
    } else {
        T::lit(0.5)
            * ((kf + T::one()).powf(h2) - T::lit(2.0) * kf.powf(h2) + (kf - T::one()).powf(h2))
    };
    core * step.powf(h2)
}

/// E|W_{t+D} - W_t|^q = K_q D^{qH}, with K_q the q-th absolute moment of N(0, 1).
pub fn abs_moment_constant<T: Real>(q: T) -> Result<T> {
    if !(q > T::zero()) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("moment order must be > 0, got {q}")));
    }
    Ok(gaussian_abs_moment(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    /// Davies-Harte circulant embedding of the increment covariance.
    #[default]
    ExactCirculant,
    /// Cholesky factor of the full increment covariance. O(n^3).
    ExactCholesky,
    /// Fractional-Haar wavelet synthesis. Approximate.
    Wavelet,
}

impl FbmMethod {
    pub fn name(self) -> &'static str {
        match self {
            FbmMethod::ExactCirculant => "exact-circulant",
            FbmMethod::ExactCholesky => "exact-cholesky",
            FbmMethod::Wavelet => "wavelet",
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, FbmMethod::Wavelet)
    }
}

impl fmt::Display for FbmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FbmMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact-circulant" | "circulant" | "davies-harte" => Ok(FbmMethod::ExactCirculant),
            "exact-cholesky" | "cholesky" => Ok(FbmMethod::ExactCholesky),
            "wavelet" => Ok(FbmMethod::Wavelet),
            other => Err(Error::InvalidArgument(format!("unknown fBm method '{other}'"))),
        }
    }
}

/// A sampled fBm path on a uniform grid starting at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FbmPath<T> {
    hurst: T,
    step: T,
    /// Method that actually produced the path (after any fallback).
    method: FbmMethod,
    values: Vec<T>,
}

impl<T: Real> FbmPath<T> {
    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.values.len())
            .map(|i| T::from_usize_lossy(i) * self.step)
            .collect()
    }

    pub fn increments(&self) -> Vec<T> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// One fBm path of `n` points (including W_0 = 0) spaced `step` apart.
///
/// Draws from stream 0 of `seed`; [`simulate_fbm_paths`] uses stream `i` for
/// path `i`, so its first path equals this one.
pub fn simulate_fbm<T: Real>(
    n: usize,
    hurst: T,
    step: T,
    seed: u64,
    method: FbmMethod,
) -> Result<FbmPath<T>> {
    simulate_fbm_with_rng(n, hurst, step, method, &mut stream_rng(seed, 0))
}

/// `count` independent paths, generated in parallel.
pub fn simulate_fbm_paths<T: Real>(
    count: usize,
    n: usize,
    hurst: T,
    step: T,
    seed: u64,
    method: FbmMethod,
) -> Result<Vec<FbmPath<T>>> {
    (0..count)
        .into_par_iter()
        .map(|i| simulate_fbm_with_rng(n, hurst, step, method, &mut stream_rng(seed, i as u64)))
        .collect()
}

pub fn simulate_fbm_with_rng<T: Real>(
    n: usize,
    hurst: T,
    step: T,
    method: FbmMethod,
    rng: &mut ChaCha8Rng,
) -> Result<FbmPath<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("fBm path needs n >= 2 points, got {n}")));
    }
    let (increments, used) = fgn(n - 1, hurst, step, method, rng)?;
    let mut values = Vec::with_capacity(n);
    let mut acc = T::zero();
    values.push(acc);
    for dx in increments {
        acc = acc + dx;
        values.push(acc);
    }
    Ok(FbmPath {
        hurst,
        step,
        method: used,
        values,
    })
}

/// `m` fBm increments over spacing `step`. Returns the method actually used.
pub fn fgn<T: Real>(
    m: usize,
    hurst: T,
    step: T,
    method: FbmMethod,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<T>, FbmMethod)> {
    check_hurst(hurst)?;
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    if m == 0 {
        return Ok((Vec::new(), method));
    }
    let acvf = |k: usize| fgn_autocovariance(k, hurst, step);
    match method {
        FbmMethod::ExactCholesky => Ok((cholesky_sample(m, acvf, rng)?, method)),
        FbmMethod::ExactCirculant => match circulant_sample(m, acvf, rng) {
            Some(x) => Ok((x, method)),
            None => {
                log::warn!(
                    "circulant embedding has a negative eigenvalue (H = {hurst}, n = {m}); falling back to Cholesky"
                );
                Ok((cholesky_sample(m, acvf, rng)?, FbmMethod::ExactCholesky))
            }
        },
        FbmMethod::Wavelet => Ok((wavelet_fgn(m, hurst, step, rng)?, method)),
    }
}

fn fft_plan<T: Real>(len: usize) -> Arc<dyn Fft<T>> {
    FftPlanner::<T>::new().plan_fft_forward(len)
}

/// Stationary Gaussian sample of length `m` with autocovariance `acvf`, or
/// `None` when the minimal circulant embedding is not nonnegative definite.
fn circulant_sample<T: Real, F: Fn(usize) -> T>(
    m: usize,
    acvf: F,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<T>> {
    let half = m.max(2).next_power_of_two();
    let size = 2 * half;
    let mut row: Vec<Complex<T>> = (0..size)
        .map(|k| {
            let lag = if k <= half { k } else { size - k };
            Complex::new(acvf(lag), T::zero())
        })
        .collect();
    let fft = fft_plan::<T>(size);
    fft.process(&mut row);
    let lmax = row.iter().map(|c| c.re.abs()).fold(T::zero(), T::max);
    let tol = lmax * T::epsilon() * T::lit(64.0);
    let sizef = T::from_usize_lossy(size);
    let mut w: Vec<Complex<T>> = Vec::with_capacity(size);
    for c in &row {
        let lambda = c.re;
        if lambda < -tol {
            return None;
        }
        let amp = (lambda.max(T::zero()) / sizef).sqrt();
        let a = T::std_normal(rng);
        let b = T::std_normal(rng);
        w.push(Complex::new(amp * a, amp * b));
    }
    fft.process(&mut w);
    Some(w.into_iter().take(m).map(|c| c.re).collect())
}

fn cholesky_sample<T: Real, F: Fn(usize) -> T>(
    m: usize,
    acvf: F,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<T>> {
    let gamma: Vec<T> = (0..m).map(&acvf).collect();
    // Lower-triangular factor, row-major packed by rows.
    let mut l = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = gamma[i - j];
            for k in 0..j {
                s = s - l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::Numerical(format!(
                        "covariance not positive definite at row {i}"
                    )));
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let z: Vec<T> = (0..m).map(|_| T::std_normal(rng)).collect();
    Ok((0..m)
        .map(|i| (0..=i).map(|k| l[i * m + k] * z[k]).sum())
        .collect())
}

const WAVELET_LEVELS: usize = 6;
const WAVELET_TAPS: usize = 128;

/// Coefficients of (1 + sign z^-1)^p truncated to `taps` terms, scaled by 1/sqrt 2.
fn fractional_filter<T: Real>(p: T, sign: T, taps: usize) -> Vec<T> {
    let mut c = Vec::with_capacity(taps);
    let mut cur = T::one();
    for k in 0..taps {
        if k > 0 {
            let kf = T::from_usize_lossy(k);
            cur = cur * sign * (p - kf + T::one()) / kf;
        }
        c.push(cur * T::FRAC_1_SQRT_2());
    }
    c
}

/// FARIMA(0, d, 0) autocovariance with unit innovation variance.
fn farima_acvf<T: Real>(d: T, len: usize) -> Vec<T> {
    let mut g = Vec::with_capacity(len);
    let mut cur = gamma(T::one() - d - d) / gamma(T::one() - d).powi(2);
    g.push(cur);
    for k in 1..len {
        let kf = T::from_usize_lossy(k);
        cur = cur * (kf - T::one() + d) / (kf - d);
        g.push(cur);
    }
    g
}

/// Wavelet synthesis with fractional Haar filters: a coarse fractionally
/// integrated sequence is refined through `WAVELET_LEVELS` levels, each adding
/// white-noise details. The fine sequence has FARIMA(0, H - 1/2, 0)
/// increments, rescaled to match the fBm spectrum at low frequencies.
fn wavelet_fgn<T: Real>(m: usize, hurst: T, step: T, rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
    let s = hurst + T::lit(0.5);
    let u = fractional_filter(T::one() + s, T::one(), WAVELET_TAPS);
    let v = fractional_filter(T::one() - s, -T::one(), WAVELET_TAPS);

    // Lengths backwards from the finest level; each refinement discards the
    // first WAVELET_TAPS outputs, which lack a full filter history.
    let mut len = m + 1;
    for _ in 0..WAVELET_LEVELS {
        len = (len + WAVELET_TAPS).div_ceil(2);
    }
    let d = hurst - T::lit(0.5);
    let g = farima_acvf(d, len.max(2).next_power_of_two() + 1);
    let coarse_inc = match circulant_sample(len, |k| g[k], rng) {
        Some(x) => x,
        None => cholesky_sample(len, |k| g[k], rng)?,
    };
    let mut approx: Vec<T> = coarse_inc
        .iter()
        .scan(T::zero(), |acc, &x| {
            *acc = *acc + x;
            Some(*acc)
        })
        .collect();

    for _ in 0..WAVELET_LEVELS {
        let detail: Vec<T> = (0..approx.len()).map(|_| T::std_normal(rng)).collect();
        let out_len = 2 * approx.len();
        let mut fine = Vec::with_capacity(out_len - WAVELET_TAPS);
        for n in WAVELET_TAPS..out_len {
            let mut acc = T::zero();
            // Taps k = n - 2j with 0 <= k < WAVELET_TAPS.
            let jmax = n / 2;
            let jmin = (n + 2).saturating_sub(WAVELET_TAPS).div_ceil(2);
            for j in jmin..=jmax.min(approx.len() - 1) {
                let k = n - 2 * j;
                acc = acc + u[k] * approx[j] + v[k] * detail[j];
            }
            fine.push(acc);
        }
        approx = fine;
    }

    let c = (gamma(hurst + hurst + T::one()) * (T::PI() * hurst).sin()).sqrt();
    let scale = step.powf(hurst) * c;
    Ok(approx[..=m].windows(2).map(|w| (w[1] - w[0]) * scale).collect())
}
