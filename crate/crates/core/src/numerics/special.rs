use crate::scalar::Real;

/// Gamma function. Exact for positive integers up to 170, Lanczos otherwise.
pub fn gamma<T: Real>(x: T) -> T {
    let xf = x.as_f64();
    if xf > 0.0 && xf.fract() == 0.0 && xf <= 170.0 {
        let n = xf as u32;
        let f = (1..n).fold(1.0f64, |acc, k| acc * k as f64);
        return T::lit(f);
    }
    T::lit(statrs::function::gamma::gamma(xf))
}

pub fn ln_gamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

/// E|Z|^q for a standard Gaussian Z: 2^{q/2} Gamma((q+1)/2) / sqrt(pi).
pub fn gaussian_abs_moment<T: Real>(q: T) -> T {
    let half = T::lit(0.5);
    (q * half * T::LN_2() + ln_gamma((q + T::one()) * half)).exp() / T::PI().sqrt()
}
