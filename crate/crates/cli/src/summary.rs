//! Plain-text summaries printed by the commands and by `report`.

use std::fmt::Write;
use std::path::Path;

use roughvol::forecaster::{BacktestReport, Track};
use roughvol::market_data::{load_report, peek_report_kind, Report};
use roughvol::range_proxies::ProxyComparison;
use roughvol::rfsv_simulator::{FsvRfsvReport, ProxyRecoveryReport, RegimeDiagnostics};
use roughvol::scaling_lab::{ScalingReport, SplitHurst};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn scaling(r: &ScalingReport<f64>) -> String {
    let mut s = String::new();
    let lags = match (r.lag_grid.first(), r.lag_grid.last()) {
        (Some(a), Some(b)) => format!("{a}..{b}"),
        _ => "-".into(),
    };
    let _ = writeln!(s, "{} ({}): {} obs, lags {lags}, H = {:.4}", r.ticker, r.proxy, r.n_obs, r.hurst);
    let _ = writeln!(s, "{:>6} {:>9} {:>9} {:>7}", "q", "zeta", "se", "R2");
    for i in 0..r.q_grid.len() {
        let _ = writeln!(
            s,
            "{:>6} {:>9.4} {:>9.4} {:>7.4}",
            r.q_grid[i], r.zeta[i], r.zeta_se[i], r.r_squared[i]
        );
    }
    if let Some(nu2) = r.nu_squared() {
        let _ = writeln!(s, "nu^2 = {nu2:.4}");
    }
    s
}

pub fn split(r: &SplitHurst<f64>) -> String {
    format!(
        "H full {:.4}, first half {:.4}, second half {:.4} (split at {})\n",
        r.full, r.first_half, r.second_half, r.split_date
    )
}

pub fn proxy_comparison(c: &ProxyComparison<f64>) -> String {
    let eff = c.efficiency.map_or("-".to_string(), |e| format!("{e:.3}"));
    format!(
        "MSE {:.3e}  MAD {:.3e}  PropBias {:.4}  StdDev {:.3e}  Eff {eff}  (n = {})\n",
        c.mse, c.mad, c.prop_bias, c.std_dev, c.n_overlap
    )
}

pub fn proxy_recovery(r: &ProxyRecoveryReport<f64>) -> String {
    let p = &r.params;
    format!(
        "H={} nu={} alpha={} m={} x0={}, {} days x {} steps, seed {}\n\
         estimated H: truth {:.4}, realized {:.4}, Garman-Klass {:.4}\n",
        p.hurst,
        p.nu,
        p.alpha,
        p.mean_level,
        p.x0,
        r.config.n_days,
        r.config.steps_per_day,
        r.config.seed,
        r.truth.hurst,
        r.realized.hurst,
        r.garman_klass.hurst
    )
}

pub fn regime(d: &RegimeDiagnostics<f64>) -> String {
    format!(
        "log-vol mean {:.3}, variance {:.3}; q=1 slope {:.3} on lags 1..5, {:.3} on lags 100..400; \
         single-line R2 {:.3}; break at lag {}\n",
        d.log_vol_mean, d.log_vol_variance, d.short_slope, d.long_slope, d.full_r_squared, d.truth_break.break_lag
    )
}

pub fn fsv_vs_rfsv(r: &FsvRfsvReport<f64>) -> String {
    format!(
        "FSV\n{}{}RFSV\n{}{}",
        proxy_recovery(&r.fsv),
        regime(&r.fsv_diagnostics),
        proxy_recovery(&r.rfsv),
        regime(&r.rfsv_diagnostics)
    )
}

pub fn backtest(r: &BacktestReport<f64>) -> String {
    let mut s = String::new();
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let _ = writeln!(
        s,
        "{} ({}): {} obs, kernel H {}, nu^2 {}",
        r.ticker,
        r.proxy,
        r.n_obs,
        fmt_opt(r.hurst),
        fmt_opt(r.nu_squared)
    );
    for track in [Track::LogVariance, Track::Variance] {
        if !r.config.tracks.contains(&track) {
            continue;
        }
        let _ = writeln!(s, "ratio P, {track}");
        let _ = write!(s, "{:>12}", "model");
        for h in &r.config.horizons {
            let _ = write!(s, " {:>8}", format!("D={h}"));
        }
        s.push('\n');
        for m in &r.config.models {
            if r.evals.iter().all(|e| e.model != *m || e.track != track) {
                continue;
            }
            let _ = write!(s, "{:>12}", m.label());
            for &h in &r.config.horizons {
                let cell = r.get(*m, track, h).map_or("-".to_string(), |e| format!("{:.4}", e.ratio_p));
                let _ = write!(s, " {cell:>8}");
            }
            s.push('\n');
        }
    }
    for f in &r.failures {
        let _ = writeln!(s, "failed: {f}");
    }
    s
}

pub fn manifest(m: &RunManifest) -> String {
    let mut s = format!("{} run, toolkit {}\nconfig: {}\n", m.command, m.toolkit_version, m.config);
    for f in &m.inputs {
        let _ = writeln!(s, "  in  {} {}", &f.sha256[..12], f.path.display());
    }
    for f in &m.outputs {
        let _ = writeln!(s, "  out {} {}", &f.sha256[..12], f.path.display());
    }
    s
}

fn load<R: Report>(path: &Path) -> CliResult<R> {
    Ok(load_report(path)?)
}

pub fn saved_report(path: &Path) -> CliResult<String> {
    let kind = peek_report_kind(path)?;
    Ok(match kind.as_str() {
        k if k == ScalingReport::<f64>::KIND => scaling(&load(path)?),
        k if k == SplitHurst::<f64>::KIND => split(&load(path)?),
        k if k == ProxyComparison::<f64>::KIND => proxy_comparison(&load(path)?),
        k if k == ProxyRecoveryReport::<f64>::KIND => proxy_recovery(&load(path)?),
        k if k == RegimeDiagnostics::<f64>::KIND => regime(&load(path)?),
        k if k == FsvRfsvReport::<f64>::KIND => fsv_vs_rfsv(&load(path)?),
        k if k == BacktestReport::<f64>::KIND => backtest(&load(path)?),
        other => return Err(CliError::data(format!("no summary for report kind '{other}'; try --json"))),
    })
}
