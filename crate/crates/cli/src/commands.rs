use std::fs;
use std::path::{Path, PathBuf};

use roughvol::forecaster::{backtest, write_eval_csv, BacktestReport, ForecastModel, Track};
use roughvol::market_data::{
    load_ohlc, load_vol_series, save_ohlc, save_report, save_vol_series, OhlcSeries, Report,
};
use roughvol::range_proxies::{compare_to_benchmark, efficiency, proxy_series_with, variance_series, CloseToCloseMode};
use roughvol::rfsv_simulator::{
    fsv_vs_rfsv_experiment, proxy_recovery_experiment, regime_diagnostics, SimulatedMarket,
};
use roughvol::scaling_lab::{
    fit_scaling, increment_distribution, split_period_hurst, write_curves_csv, write_histogram_csv, write_zeta_csv,
    ScalingReport,
};
use roughvol::{calendar_lag, ProxyKind};

use crate::args::{ForecastArgs, ProxyArgs, ReportArgs, ScalingArgs, SimulateArgs};
use crate::error::{CliError, CliResult, EXIT_NUMERICAL};
use crate::manifest::{RunManifest, MANIFEST_SCHEMA};
use crate::settings::{ConfigSource, ForecastSettings, ProxySettings, ScalingSettings, SimModel, SimulateSettings};
use crate::summary;

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Saves a report and records it in the manifest.
fn emit_report<R: Report>(report: &R, path: PathBuf, manifest: &mut RunManifest) -> CliResult<()> {
    save_report(report, &path)?;
    manifest.output(&path)
}

fn efficiency_vs_cc(series: &OhlcSeries<f64>, proxy: ProxyKind, mode: CloseToCloseMode) -> CliResult<f64> {
    let cand = variance_series(series, proxy, mode)?;
    let cc = variance_series(series, ProxyKind::CloseToClose, mode)?;
    let (a, b): (Vec<f64>, Vec<f64>) = cand
        .iter()
        .zip(&cc)
        .filter_map(|((_, x), (_, y))| Some(((*x)?, (*y)?)))
        .unzip();
    Ok(efficiency(&a, &b)?)
}

pub fn proxy(args: ProxyArgs, source: &ConfigSource, threads: Option<usize>) -> CliResult<()> {
    let mut s: ProxySettings = source.section("proxy")?;
    if let Some(e) = args.estimator {
        s.estimator = e;
    }
    if let Some(m) = args.cc_mode {
        s.cc_mode = m;
    }
    if !s.estimator.is_range_based() {
        return Err(CliError::usage(format!("{} cannot be computed from OHLC bars", s.estimator)));
    }
    let mut manifest = RunManifest::new("proxy", &s, threads)?;
    let series = load_ohlc::<f64>(&args.input)?;
    manifest.input(&args.input)?;
    let vol = proxy_series_with(&series, s.estimator, s.cc_mode)?;
    save_vol_series(&vol, &args.output)?;
    manifest.output(&args.output)?;
    println!("{}: {} {} observations -> {}", vol.ticker(), vol.len(), s.estimator, args.output.display());

    if let Some(bench_path) = &args.benchmark {
        let bench = load_vol_series::<f64>(bench_path)?;
        manifest.input(bench_path)?;
        let mut cmp = compare_to_benchmark(&vol, &bench)?;
        if s.estimator != ProxyKind::CloseToClose {
            cmp.efficiency = Some(efficiency_vs_cc(&series, s.estimator, s.cc_mode)?);
        }
        print!("{}", summary::proxy_comparison(&cmp));
        let path = args.comparison.unwrap_or_else(|| with_suffix(&args.output, ".comparison.json"));
        emit_report(&cmp, path, &mut manifest)?;
    }
    manifest.save(&with_suffix(&args.output, ".manifest.json"))
}

pub fn scaling(args: ScalingArgs, source: &ConfigSource, threads: Option<usize>) -> CliResult<()> {
    let mut s: ScalingSettings = source.section("scaling")?;
    if let Some(q) = args.q {
        s.q = q;
    }
    s.min_lag = args.min_lag.unwrap_or(s.min_lag);
    s.max_lag = args.max_lag.unwrap_or(s.max_lag);
    s.min_pairs = args.min_pairs.unwrap_or(s.min_pairs);
    s.split_halves |= args.split_halves;
    if let Some(l) = args.histogram_lags {
        s.histogram_lags = l;
    }
    s.histogram_bins = args.histogram_bins.unwrap_or(s.histogram_bins);
    let config = s.scaling_config()?;

    let mut manifest = RunManifest::new("scaling", &s, threads)?;
    let vol = load_vol_series::<f64>(&args.input)?;
    manifest.input(&args.input)?;
    let dates = vol.dates();
    let span = match (dates.first(), dates.last()) {
        (Some(&a), Some(&b)) if a < b => calendar_lag(a, b)?,
        _ => 0,
    };
    if s.max_lag >= span {
        return Err(CliError::data(format!(
            "lag range {}..{} exceeds the data span of {span} calendar days",
            s.min_lag, s.max_lag
        )));
    }
    create_dir(&args.output_dir)?;
    let out = |name: &str| args.output_dir.join(name);

    let report = fit_scaling(&vol, &config)?;
    print!("{}", summary::scaling(&report));
    emit_report(&report, out("scaling.json"), &mut manifest)?;
    write_curves_csv(&report, out("curves.csv"))?;
    manifest.output(&out("curves.csv"))?;
    write_zeta_csv(&report, out("zeta.csv"))?;
    manifest.output(&out("zeta.csv"))?;

    if s.split_halves {
        let split = split_period_hurst(&vol, &config)?;
        print!("{}", summary::split(&split));
        emit_report(&split, out("split.json"), &mut manifest)?;
    }
    for &lag in &s.histogram_lags {
        let hist = increment_distribution(&vol, lag, report.hurst, s.histogram_bins)?;
        let path = out(&format!("increments_lag{lag}.csv"));
        write_histogram_csv(&hist, &path)?;
        manifest.output(&path)?;
    }
    manifest.save(&out("manifest.json"))
}

fn write_market(market: &SimulatedMarket<f64>, dir: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    create_dir(dir)?;
    let series = [
        ("truth", market.true_vol()?),
        ("realized", market.realized_vol()?),
        ("garman_klass", market.gk_vol()?),
    ];
    for (name, vol) in &series {
        let path = dir.join(format!("{name}.csv"));
        save_vol_series(vol, &path)?;
        manifest.output(&path)?;
    }
    if let Some(ohlc) = &market.ohlc {
        let path = dir.join("ohlc.csv");
        save_ohlc(ohlc, &path)?;
        manifest.output(&path)?;
    }
    Ok(())
}

fn write_curves(reports: &[(&str, &ScalingReport<f64>)], dir: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    for (name, r) in reports {
        let path = dir.join(format!("curves_{name}.csv"));
        write_curves_csv(r, &path)?;
        manifest.output(&path)?;
    }
    Ok(())
}

pub fn simulate(args: SimulateArgs, source: &ConfigSource, threads: Option<usize>) -> CliResult<()> {
    let mut s: SimulateSettings = source.section("simulate")?;
    s.model = args.model.unwrap_or(s.model);
    s.hurst = args.h.or(s.hurst);
    s.nu = args.nu.or(s.nu);
    s.alpha = args.alpha.or(s.alpha);
    s.mean_level = args.m.or(s.mean_level);
    s.x0 = args.x0.or(s.x0);
    s.days = args.days.unwrap_or(s.days);
    s.steps_per_day = args.steps_per_day.unwrap_or(s.steps_per_day);
    s.seed = args.seed.unwrap_or(s.seed);
    s.scheme = args.scheme.unwrap_or(s.scheme);
    s.window_hours = args.window_hours.unwrap_or(s.window_hours);
    s.p0 = args.p0.unwrap_or(s.p0);
    s.fbm_method = args.fbm_method.unwrap_or(s.fbm_method);
    if let Some(q) = args.q {
        s.q = q;
    }
    s.max_lag = args.max_lag.unwrap_or(s.max_lag);
    s.resolve()?;

    let mut manifest = RunManifest::new("simulate", &s, threads)?;
    let dir = &args.output_dir;
    create_dir(dir)?;
    let sim = s.sim_config();
    let scaling = s.scaling_config();
    match s.model {
        SimModel::Rfsv | SimModel::Fsv => {
            let params = s.params()?;
            let (market, report) = proxy_recovery_experiment(&params, &sim, &scaling)?;
            print!("{}", summary::proxy_recovery(&report));
            write_market(&market, dir, &mut manifest)?;
            write_curves(
                &[
                    ("truth", &report.truth),
                    ("realized", &report.realized),
                    ("garman_klass", &report.garman_klass),
                ],
                dir,
                &mut manifest,
            )?;
            if s.model == SimModel::Fsv {
                let diag = regime_diagnostics(&market, &report)?;
                print!("{}", summary::regime(&diag));
                emit_report(&diag, dir.join("diagnostics.json"), &mut manifest)?;
            }
            emit_report(&report, dir.join("report.json"), &mut manifest)?;
        }
        SimModel::FsvVsRfsv => {
            let (fsv_m, rfsv_m, report) = fsv_vs_rfsv_experiment(&sim, &scaling)?;
            print!("{}", summary::fsv_vs_rfsv(&report));
            for (name, market, rep) in [("fsv", &fsv_m, &report.fsv), ("rfsv", &rfsv_m, &report.rfsv)] {
                let sub = dir.join(name);
                write_market(market, &sub, &mut manifest)?;
                write_curves(
                    &[("truth", &rep.truth), ("realized", &rep.realized), ("garman_klass", &rep.garman_klass)],
                    &sub,
                    &mut manifest,
                )?;
            }
            emit_report(&report, dir.join("report.json"), &mut manifest)?;
        }
    }
    manifest.save(&dir.join("manifest.json"))
}

pub fn forecast(args: ForecastArgs, source: &ConfigSource, threads: Option<usize>) -> CliResult<()> {
    let mut s: ForecastSettings = source.section("forecast")?;
    if let Some(m) = args.models {
        s.models = m;
    }
    if let Some(h) = args.horizons {
        s.horizons = h;
    }
    s.track = args.track.unwrap_or(s.track);
    s.window = args.window.unwrap_or(s.window);
    s.start = args.start.unwrap_or(s.start);
    s.epsilon = args.epsilon.unwrap_or(s.epsilon);
    s.hurst = args.hurst.or(s.hurst);
    s.nu_squared = args.nu_squared.or(s.nu_squared);
    let needs_returns = s.models.contains(&ForecastModel::Garch) && s.track.tracks().contains(&Track::Variance);
    if needs_returns && args.ohlc.is_none() {
        return Err(CliError::usage("GARCH needs the asset's daily returns: pass --ohlc <csv>"));
    }

    let mut manifest = RunManifest::new("forecast", &s, threads)?;
    let vol = load_vol_series::<f64>(&args.input)?;
    manifest.input(&args.input)?;
    let returns = match &args.ohlc {
        Some(p) => {
            let ohlc = load_ohlc::<f64>(p)?;
            manifest.input(p)?;
            Some(ohlc.log_returns())
        }
        None => None,
    };
    let report: BacktestReport<f64> = backtest(&vol, returns.as_deref(), &s.backtest_config())?;
    for f in &report.failures {
        log::warn!("{f}");
    }
    if report.evals.is_empty() && !report.failures.is_empty() {
        return Err(CliError {
            code: EXIT_NUMERICAL,
            message: format!("no forecasts produced: {}", report.failures.join("; ")),
        });
    }
    print!("{}", summary::backtest(&report));
    create_dir(&args.output_dir)?;
    for track in s.track.tracks() {
        let path = args.output_dir.join(format!("p_{}.csv", track.name().replace('-', "_")));
        write_eval_csv(&report.evals, track, &path)?;
        manifest.output(&path)?;
    }
    emit_report(&report, args.output_dir.join("backtest.json"), &mut manifest)?;
    manifest.save(&args.output_dir.join("manifest.json"))
}

pub fn report(args: ReportArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", args.input.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: not JSON: {e}", args.input.display())))?;
    if value.get("schema").and_then(|v| v.as_str()) == Some(MANIFEST_SCHEMA) {
        let m: RunManifest = serde_json::from_value(value).map_err(|e| CliError::data(e.to_string()))?;
        m.check_schema()?;
        print!("{}", summary::manifest(&m));
        let stale = m.stale_files();
        if !stale.is_empty() {
            let list: Vec<String> = stale.iter().map(|(p, why)| format!("{}: {why}", p.display())).collect();
            return Err(CliError::data(format!("manifest does not match the files: {}", list.join("; "))));
        }
        return Ok(());
    }
    if args.json {
        let data = value.get("data").cloned().unwrap_or(serde_json::Value::Null);
        println!("{}", serde_json::to_string_pretty(&data).map_err(|e| CliError::data(e.to_string()))?);
        return Ok(());
    }
    print!("{}", summary::saved_report(&args.input)?);
    Ok(())
}

