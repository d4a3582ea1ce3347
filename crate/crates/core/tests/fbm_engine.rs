use approx::assert_relative_eq;
use proptest::prelude::*;

use roughvol::fbm_engine::{
    abs_moment_constant, fbm_covariance, fgn_autocovariance, simulate_fbm, simulate_fbm_paths, FbmMethod,
};

fn sample_cov(paths: &[Vec<f64>], i: usize, j: usize) -> (f64, f64) {
    let n = paths.len() as f64;
    let prod: Vec<f64> = paths.iter().map(|p| p[i] * p[j]).collect();
    let m = prod.iter().sum::<f64>() / n;
    let v = prod.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn exact_methods_match_covariance_within_four_se() {
    for method in [FbmMethod::ExactCirculant, FbmMethod::ExactCholesky] {
        for &h in &[0.08, 0.3, 0.7] {
            let paths: Vec<Vec<f64>> = simulate_fbm_paths(4000, 9, h, 1.0, 11, method)
                .unwrap()
                .into_iter()
                .map(|p| p.into_values())
                .collect();
            for i in 1..9 {
                for j in i..9 {
                    let (m, se) = sample_cov(&paths, i, j);
                    let exact = fbm_covariance(i as f64, j as f64, h).unwrap();
                    assert!((m - exact).abs() <= 4.0 * se, "{method:?} H={h} ({i},{j}): {m} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn fgn_autocovariance_matches_path_covariance() {
    // Cov(W_{k+1} - W_k, W_1 - W_0) from the fBm covariance.
    let h = 0.3;
    for k in 0..6usize {
        let kf = k as f64;
        let via_fbm = fbm_covariance(kf + 1.0, 1.0, h).unwrap() - fbm_covariance(kf, 1.0, h).unwrap();
        assert_relative_eq!(fgn_autocovariance(k, h, 1.0), via_fbm, epsilon = 1e-12);
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn increments_are_stationary() {
    // Lag-5 increments from disjoint windows of independent paths.
    let paths = simulate_fbm_paths(2000, 200, 0.1, 1.0, 3, FbmMethod::ExactCirculant).unwrap();
    let mut early: Vec<f64> = paths.iter().map(|p| p.values()[10] - p.values()[5]).collect();
    let mut late: Vec<f64> = paths.iter().map(|p| p.values()[190] - p.values()[185]).collect();
    let d = ks(&mut early, &mut late);
    // 1% critical value for two samples of 2000.
    let crit = 1.628 * (2.0 / 2000.0f64).sqrt();
    assert!(d < crit, "KS {d} >= {crit}");
}

#[test]
fn self_similarity_on_long_paths() {
    let (h, n) = (0.3f64, 20_000usize);
    let lags: Vec<usize> = vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000];
    let x: Vec<f64> = lags.iter().map(|&l| (l as f64).ln()).collect();
    for &q in &[1.0, 2.0] {
        let mut slopes = Vec::new();
        for seed in 0..20 {
            let p = simulate_fbm(n, h, 1.0, 500 + seed, FbmMethod::ExactCirculant).unwrap();
            let v = p.values();
            let y: Vec<f64> = lags
                .iter()
                .map(|&l| {
                    let m = (l..n).map(|t| (v[t] - v[t - l]).abs().powf(q)).sum::<f64>() / (n - l) as f64;
                    m.ln()
                })
                .collect();
            let fit = roughvol::numerics::lstsq::fit_line(&x, &y).unwrap();
            slopes.push(fit.slope);
        }
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        assert!((mean - q * h).abs() <= 0.02 * q, "q={q}: slope {mean} vs {}", q * h);
    }
}

#[test]
fn standard_brownian_motion_at_half() {
    // H = 1/2 increments are i.i.d. N(0, step).
    let p = simulate_fbm(50_001, 0.5, 0.25, 9, FbmMethod::ExactCirculant).unwrap();
    let inc = p.increments();
    let var = inc.iter().map(|x| x * x).sum::<f64>() / inc.len() as f64;
    assert_relative_eq!(var, 0.25, max_relative = 0.03);
    let lag1 = inc.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (inc.len() - 1) as f64;
    assert!(lag1.abs() < 0.01);
}

#[test]
fn wavelet_path_has_fbm_variance_at_half() {
    let paths = simulate_fbm_paths(400, 257, 0.5f64, 1.0, 21, FbmMethod::Wavelet).unwrap();
    assert!(paths.iter().all(|p| p.method() == FbmMethod::Wavelet));
    let var = paths.iter().map(|p| p.values()[256].powi(2)).sum::<f64>() / 400.0;
    assert_relative_eq!(var, 256.0, max_relative = 0.15);
}

#[test]
fn same_seed_same_path_and_first_of_many_equals_single() {
    let a = simulate_fbm(300, 0.08, 1.0, 42, FbmMethod::ExactCirculant).unwrap();
    let b = simulate_fbm(300, 0.08, 1.0, 42, FbmMethod::ExactCirculant).unwrap();
    assert_eq!(a, b);
    let many = simulate_fbm_paths(3, 300, 0.08, 1.0, 42, FbmMethod::ExactCirculant).unwrap();
    assert_eq!(many[0], a);
    assert_ne!(many[1], a);
}

#[test]
fn f32_paths_work() {
    let p = simulate_fbm(64, 0.2f32, 1.0, 1, FbmMethod::ExactCirculant).unwrap();
    assert_eq!(p.len(), 64);
    assert_eq!(p.values()[0], 0.0);
    assert!(p.values().iter().all(|v| v.is_finite()));
}

#[test]
fn abs_moment_constants() {
    assert_relative_eq!(abs_moment_constant(2.0).unwrap(), 1.0, epsilon = 1e-14);
    assert_relative_eq!(abs_moment_constant(1.0).unwrap(), (2.0 / std::f64::consts::PI).sqrt(), epsilon = 1e-14);
    assert_relative_eq!(abs_moment_constant(4.0).unwrap(), 3.0, epsilon = 1e-13);
    assert!(abs_moment_constant(0.0).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(simulate_fbm(10, 0.0, 1.0, 0, FbmMethod::ExactCirculant).is_err());
    assert!(simulate_fbm(10, 1.0, 1.0, 0, FbmMethod::ExactCirculant).is_err());
    assert!(simulate_fbm(1, 0.3, 1.0, 0, FbmMethod::ExactCirculant).is_err());
}

proptest! {
    #[test]
    fn covariance_is_symmetric_and_matches_variance(t in 0.0f64..50.0, s in 0.0f64..50.0, h in 0.01f64..0.99) {
        let c = fbm_covariance(t, s, h).unwrap();
        prop_assert!((c - fbm_covariance(s, t, h).unwrap()).abs() <= 1e-9 * (1.0 + c.abs()));
        prop_assert!((fbm_covariance(t, t, h).unwrap() - t.powf(2.0 * h)).abs() <= 1e-9 * (1.0 + t.powf(2.0 * h)));
        // Cauchy-Schwarz.
        prop_assert!(c.abs() <= (t.powf(2.0 * h) * s.powf(2.0 * h)).sqrt() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn paths_start_at_zero(h in 0.02f64..0.98, n in 2usize..200, seed in any::<u64>()) {
        let p = simulate_fbm(n, h, 1.0, seed, FbmMethod::ExactCirculant).unwrap();
        prop_assert_eq!(p.len(), n);
        prop_assert_eq!(p.values()[0], 0.0);
        prop_assert!(p.values().iter().all(|v| v.is_finite()));
    }
}
