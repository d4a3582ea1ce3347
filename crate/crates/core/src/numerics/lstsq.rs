//! Ordinary least squares: the simple two-parameter line used by the scaling
//! fits and a Householder-QR multiple regression used by the AR/HAR fitters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// y = intercept + slope * x fitted by OLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub slope_se: T,
    pub n: usize,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "x has {} points, y has {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateRegression(format!("{n} point(s)")));
    }
    let nf = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateRegression("all x values equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = y
        .iter()
        .zip(x)
        .map(|(&yi, &xi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum::<T>();
    let r_squared = if syy > T::zero() {
        (T::one() - sse / syy).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let slope_se = if n > 2 {
        (sse / T::from_usize_lossy(n - 2) / sxx).sqrt()
    } else {
        T::zero()
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
        n,
    })
}

/// Least-squares slope of y = b x (no intercept).
pub fn fit_through_origin<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    let sxx: T = x.iter().map(|&v| v * v).sum();
    if x.len() != y.len() || !(sxx > T::zero()) {
        return Err(Error::DegenerateRegression(
            "zero-intercept fit needs matching, nonzero x".into(),
        ));
    }
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
    Ok(sxy / sxx)
}

/// Multiple regression result. `coef[0]` is the intercept when one was fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OlsFit<T> {
    pub coef: Vec<T>,
    pub std_err: Vec<T>,
    pub sigma2: T,
    pub n: usize,
}

impl<T: Real> OlsFit<T> {
    pub fn predict(&self, regressors: &[T], intercept: bool) -> T {
        if intercept {
            self.coef[0]
                + self.coef[1..]
                    .iter()
                    .zip(regressors)
                    .map(|(&c, &x)| c * x)
                    .sum::<T>()
        } else {
            self.coef.iter().zip(regressors).map(|(&c, &x)| c * x).sum()
        }
    }
}

/// OLS of `y` on the rows of `design` via Householder QR.
pub fn ols<T: Real>(design: &[Vec<T>], y: &[T], intercept: bool) -> Result<OlsFit<T>> {
    let n = y.len();
    if design.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} design rows for {n} targets",
            design.len()
        )));
    }
    let k_raw = design.first().map_or(0, Vec::len);
    let k = k_raw + usize::from(intercept);
    if k == 0 || n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} coefficients"
        )));
    }
    // Column-major copy of the design matrix.
    let mut a: Vec<Vec<T>> = vec![vec![T::zero(); n]; k];
    for (i, row) in design.iter().enumerate() {
        if row.len() != k_raw {
            return Err(Error::InvalidArgument("ragged design matrix".into()));
        }
        if intercept {
            a[0][i] = T::one();
        }
        for (j, &v) in row.iter().enumerate() {
            a[j + usize::from(intercept)][i] = v;
        }
    }
    let mut b = y.to_vec();
    let scale: T = a
        .iter()
        .map(|col| col.iter().map(|v| v.abs()).fold(T::zero(), T::max))
        .fold(T::zero(), T::max);

    let mut diag = vec![T::zero(); k];
    for j in 0..k {
        let norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(norm > T::epsilon() * T::lit(1e3) * scale * T::from_usize_lossy(n).sqrt()) {
            return Err(Error::SingularDesign);
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 > T::zero() {
            for col in a.iter_mut().skip(j + 1) {
                let dot: T = v.iter().zip(&col[j..]).map(|(&p, &q)| p * q).sum();
                let f = T::lit(2.0) * dot / vnorm2;
                for (c, &vi) in col[j..].iter_mut().zip(&v) {
                    *c = *c - f * vi;
                }
            }
            let dot: T = v.iter().zip(&b[j..]).map(|(&p, &q)| p * q).sum();
            let f = T::lit(2.0) * dot / vnorm2;
            for (c, &vi) in b[j..].iter_mut().zip(&v) {
                *c = *c - f * vi;
            }
        }
        a[j][j] = alpha;
    }
    // Relative conditioning check on R's diagonal.
    let dmax = diag.iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let dmin = diag.iter().map(|d| d.abs()).fold(T::infinity(), T::min);
    if !(dmin > dmax * T::epsilon() * T::lit(1e4)) {
        return Err(Error::SingularDesign);
    }
    // Back substitution R coef = Q^T y.
    let r = |i: usize, j: usize| if i == j { diag[i] } else { a[j][i] };
    let mut coef = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s = s - r(i, j) * coef[j];
        }
        coef[i] = s / r(i, i);
    }
    let sse: T = b[k..].iter().map(|&v| v * v).sum();
    let sigma2 = sse / T::from_usize_lossy(n - k);
    // diag((R^T R)^-1) = row norms of R^-1.
    let mut rinv = vec![vec![T::zero(); k]; k];
    for j in 0..k {
        rinv[j][j] = T::one() / r(j, j);
        for i in (0..j).rev() {
            let mut s = T::zero();
            for m in i + 1..=j {
                s = s + r(i, m) * rinv[m][j];
            }
            rinv[i][j] = -s / r(i, i);
        }
    }
    let std_err = (0..k)
        .map(|i| (rinv[i].iter().map(|&v| v * v).sum::<T>() * sigma2).sqrt())
        .collect();
    Ok(OlsFit {
        coef,
        std_err,
        sigma2,
        n,
    })
}
