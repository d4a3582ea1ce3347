use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roughvol::market_data::{load_report, load_vol_series, save_ohlc, save_vol_series, VolSeries};
use roughvol::range_proxies::ProxyComparison;
use roughvol::rfsv_simulator::{simulate_market, FouParams, SimConfig};
use roughvol::scaling_lab::{ScalingReport, SplitHurst};
use roughvol::ProxyKind;

fn roughvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughvol"))
        .args(args)
        .env_remove("ROUGHVOL_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Simulated OHLC and realized-vol files for `days` consecutive days.
fn market_files(dir: &Path, days: usize) -> (PathBuf, PathBuf) {
    let cfg = SimConfig {
        n_days: days,
        steps_per_day: 200,
        seed: 11,
        ..SimConfig::default()
    };
    let m = simulate_market(&FouParams::<f64>::rfsv_index(), &cfg).unwrap();
    let ohlc = dir.join("SIM.csv");
    save_ohlc(m.ohlc.as_ref().unwrap(), &ohlc).unwrap();
    let rv = dir.join("rv.csv");
    save_vol_series(&m.realized_vol().unwrap(), &rv).unwrap();
    (ohlc, rv)
}

#[test]
fn proxy_writes_series_comparison_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (ohlc, rv) = market_files(dir.path(), 300);
    let out = dir.path().join("gk.csv");
    let o = roughvol(&["proxy", "--estimator", "gk-practical", s(&ohlc), s(&out), "--benchmark", s(&rv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let vol: VolSeries<f64> = load_vol_series(&out).unwrap();
    assert_eq!(vol.proxy(), ProxyKind::GarmanKlassPractical);
    assert_eq!(vol.len(), 300);
    let cmp: ProxyComparison<f64> = load_report(dir.path().join("gk.csv.comparison.json")).unwrap();
    assert_eq!(cmp.n_overlap, 300);
    assert!(cmp.efficiency.unwrap() > 1.0);
    let manifest = fs::read_to_string(dir.path().join("gk.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"command\": \"proxy\""));
    assert!(manifest.contains("SIM.csv") && manifest.contains("rv.csv"));
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (ohlc, rv) = market_files(dir.path(), 100);
    let out = dir.path().join("x.csv");
    assert_eq!(code(&roughvol(&["proxy", "--estimator", "vix", s(&ohlc), s(&out)])), 2);
    assert_eq!(code(&roughvol(&["proxy", "--estimator", "rv", s(&ohlc), s(&out)])), 2);
    assert_eq!(code(&roughvol(&["proxy", "-e", "gk", s(&ohlc), s(&out)])), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,open,high,low,close\n2000-01-03,1,0.5,0.9,1\n").unwrap();
    let o = roughvol(&["proxy", s(&bad), s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&roughvol(&["proxy", s(&dir.path().join("none.csv")), s(&out)])), 3);
    // A volatility file is not an OHLC file.
    assert_eq!(code(&roughvol(&["proxy", s(&rv), s(&out)])), 3);
}

#[test]
fn proxy_output_feeds_scaling_and_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let (ohlc, _) = market_files(dir.path(), 900);
    let gk = dir.path().join("gk.csv");
    assert_eq!(code(&roughvol(&["proxy", s(&ohlc), s(&gk)])), 0);

    let sc = dir.path().join("scaling");
    let o = roughvol(&[
        "scaling", s(&gk), "--output-dir", s(&sc), "--max-lag", "100", "--split-halves", "--histogram-lags", "1,5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: ScalingReport<f64> = load_report(sc.join("scaling.json")).unwrap();
    assert_eq!(*rep.lag_grid.last().unwrap(), 100);
    let split: SplitHurst<f64> = load_report(sc.join("split.json")).unwrap();
    assert_eq!(split.full, rep.hurst);
    for f in ["curves.csv", "zeta.csv", "increments_lag1.csv", "increments_lag5.csv", "manifest.json"] {
        assert!(sc.join(f).exists(), "{f}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("H = "));

    let fc = dir.path().join("forecast");
    let o = roughvol(&[
        "forecast", s(&gk), "--output-dir", s(&fc), "--models", "rfsv,ar5,har,garch", "--horizons", "1,5",
        "--ohlc", s(&ohlc),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(fc.join("p_log_variance.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("ticker,model,horizon,ratio_p,n_forecasts"));
    assert_eq!(lines.count(), 6);
    let var_table = fs::read_to_string(fc.join("p_variance.csv")).unwrap();
    assert_eq!(var_table.lines().count(), 9);
    assert!(var_table.contains("GARCH(1,1)"));

    let o = roughvol(&["report", s(&fc.join("backtest.json"))]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("RFSV"));
}

#[test]
fn scaling_rejects_lags_beyond_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rv) = market_files(dir.path(), 300);
    let o = roughvol(&["scaling", s(&rv), "--output-dir", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the data span"));
}

#[test]
fn forecast_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rv) = market_files(dir.path(), 515);
    let out = dir.path().join("f");
    let o = roughvol(&["forecast", s(&rv), "--output-dir", s(&out), "--models", "rfsv,ar5"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("521"));
    let o = roughvol(&["forecast", s(&rv), "--output-dir", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--ohlc"));
    assert_eq!(code(&roughvol(&["forecast", s(&rv), "--output-dir", s(&out), "--models", "arima"])), 2);
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_is_reproducible_from_seed_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--model".into(),
            "rfsv".into(),
            "--h".into(),
            "0.1".into(),
            "--m".into(),
            "-4.5".into(),
            "--days".into(),
            "500".into(),
            "--steps-per-day".into(),
            "100".into(),
            "--seed".into(),
            "9".into(),
            "--max-lag".into(),
            "50".into(),
            "--output-dir".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |v: Vec<String>| roughvol(&v.iter().map(String::as_str).collect::<Vec<_>>());
    let o = run(args(&a));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(args(&b))), 0);
    let files = data_files(&a);
    assert!(files.iter().any(|(n, _)| n == "ohlc.csv"));
    assert!(files.iter().any(|(n, _)| n == "report.json"));
    assert_eq!(files, data_files(&b));

    let manifest = a.join("manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("\"seed\": 9") && text.contains("\"x0\": -4.5"));
    let o = roughvol(&["simulate", "--config", s(&manifest), "--output-dir", s(&c)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files, data_files(&c));

    assert_eq!(code(&roughvol(&["report", s(&manifest)])), 0);
    fs::write(a.join("truth.csv"), "tampered").unwrap();
    assert_eq!(code(&roughvol(&["report", s(&manifest)])), 3);
}

#[test]
fn simulate_fsv_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fsv");
    let o = roughvol(&[
        "simulate", "--model", "fsv", "--days", "1000", "--steps-per-day", "50", "--max-lag", "400", "--output-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("diagnostics.json")).unwrap();
    assert!(text.contains("\"kind\": \"regime-diagnostics\""));
    let o = roughvol(&["report", s(&out.join("diagnostics.json"))]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("lags 100..400"));
}

#[test]
fn exploding_volatility_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let base = [
        "simulate", "--h", "0.7", "--nu", "0.25", "--alpha", "0", "--m", "-4.5", "--days", "2521", "--steps-per-day",
        "20", "--max-lag", "100", "--output-dir", s(&out),
    ];
    assert_eq!(code(&roughvol(&base)), 4);
    let mut log = base.to_vec();
    log.extend(["--scheme", "log-euler"]);
    let o = roughvol(&log);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (ohlc, _) = market_files(dir.path(), 50);
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "threads = 1\n[proxy]\nestimator = \"parkinson\"\n").unwrap();
    let out = dir.path().join("p.csv");
    assert_eq!(code(&roughvol(&["proxy", "--config", s(&cfg), s(&ohlc), s(&out)])), 0);
    assert_eq!(load_vol_series::<f64>(&out).unwrap().proxy(), ProxyKind::Parkinson);
    let o = roughvol(&["proxy", "--config", s(&cfg), "--estimator", "rs", s(&ohlc), s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(load_vol_series::<f64>(&out).unwrap().proxy(), ProxyKind::RogersSatchell);

    fs::write(&cfg, "[proxy]\nestimatr = \"parkinson\"\n").unwrap();
    assert_eq!(code(&roughvol(&["proxy", "--config", s(&cfg), s(&ohlc), s(&out)])), 2);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (ohlc, _) = market_files(dir.path(), 50);
    let out = dir.path().join("p.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_roughvol"))
        .args(["proxy", s(&ohlc), s(&out)])
        .env("ROUGHVOL_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(dir.path().join("p.csv.manifest.json")).unwrap().contains("\"threads\": 2"));
    let o = Command::new(env!("CARGO_BIN_EXE_roughvol"))
        .args(["proxy", s(&ohlc), s(&out)])
        .env("ROUGHVOL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
