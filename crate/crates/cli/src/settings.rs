//! Resolved parameters of each command. Defaults, then the `--config` file,
//! then explicit flags; the result is what the manifest records.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use roughvol::fbm_engine::FbmMethod;
use roughvol::forecaster::{BacktestConfig, ForecastModel, Track, DEFAULT_EPSILON, DEFAULT_WINDOW};
use roughvol::range_proxies::CloseToCloseMode;
use roughvol::rfsv_simulator::{FouParams, PriceScheme, SimConfig};
use roughvol::scaling_lab::{ScalingConfig, DEFAULT_MAX_LAG, DEFAULT_MIN_PAIRS, DEFAULT_Q_GRID};
use roughvol::ProxyKind;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub threads: Option<usize>,
    pub proxy: Option<toml::Value>,
    pub scaling: Option<toml::Value>,
    pub simulate: Option<toml::Value>,
    pub forecast: Option<toml::Value>,
}

/// A config source: a TOML file with one table per command, or the manifest
/// of an earlier run, whose recorded config is replayed.
pub enum ConfigSource {
    Toml(ConfigFile),
    Manifest(RunManifest),
}

impl ConfigSource {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: RunManifest = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{} is not a run manifest: {e}", path.display())))?;
            m.check_schema()?;
            Ok(ConfigSource::Manifest(m))
        } else {
            toml::from_str(&text)
                .map(ConfigSource::Toml)
                .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
        }
    }

    pub fn threads(&self) -> Option<usize> {
        match self {
            ConfigSource::Toml(c) => c.threads,
            ConfigSource::Manifest(m) => m.threads,
        }
    }

    /// The settings for `command`, or the defaults when the source has none.
    pub fn section<S: DeserializeOwned + Default>(&self, command: &str) -> CliResult<S> {
        match self {
            ConfigSource::Toml(c) => {
                let v = match command {
                    "proxy" => &c.proxy,
                    "scaling" => &c.scaling,
                    "simulate" => &c.simulate,
                    "forecast" => &c.forecast,
                    _ => &None,
                };
                match v {
                    Some(v) => v
                        .clone()
                        .try_into()
                        .map_err(|e| CliError::usage(format!("invalid [{command}] config: {e}"))),
                    None => Ok(S::default()),
                }
            }
            ConfigSource::Manifest(m) => {
                if m.command != command {
                    return Err(CliError::usage(format!(
                        "manifest records a '{}' run, not '{command}'",
                        m.command
                    )));
                }
                serde_json::from_value(m.config.clone())
                    .map_err(|e| CliError::usage(format!("manifest config does not fit '{command}': {e}")))
            }
        }
    }
}

/// Parses a kebab-case enum value through its serde name.
pub fn parse_kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxySettings {
    pub estimator: ProxyKind,
    pub cc_mode: CloseToCloseMode,
}

impl Default for ProxySettings {
    fn default() -> Self {
        ProxySettings {
            estimator: ProxyKind::GarmanKlassPractical,
            cc_mode: CloseToCloseMode::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSettings {
    pub q: Vec<f64>,
    pub min_lag: i64,
    pub max_lag: i64,
    pub min_pairs: usize,
    pub split_halves: bool,
    pub histogram_lags: Vec<i64>,
    pub histogram_bins: usize,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        ScalingSettings {
            q: DEFAULT_Q_GRID.to_vec(),
            min_lag: 1,
            max_lag: DEFAULT_MAX_LAG,
            min_pairs: DEFAULT_MIN_PAIRS,
            split_halves: false,
            histogram_lags: Vec::new(),
            histogram_bins: 50,
        }
    }
}

impl ScalingSettings {
    pub fn scaling_config(&self) -> CliResult<ScalingConfig<f64>> {
        if self.min_lag < 1 || self.max_lag < self.min_lag {
            return Err(CliError::usage(format!(
                "lag range {}..{} is empty or starts below 1",
                self.min_lag, self.max_lag
            )));
        }
        Ok(ScalingConfig {
            q_grid: self.q.clone(),
            lag_grid: (self.min_lag..=self.max_lag).collect(),
            min_pairs: self.min_pairs,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    /// Rough model with small mean reversion.
    #[default]
    Rfsv,
    /// Smooth model with strong mean reversion, plus two-slope diagnostics.
    Fsv,
    /// Both comparison models on the same seed.
    FsvVsRfsv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub model: SimModel,
    pub hurst: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub mean_level: Option<f64>,
    pub x0: Option<f64>,
    pub days: usize,
    pub steps_per_day: usize,
    pub seed: u64,
    pub scheme: PriceScheme,
    pub window_hours: f64,
    pub p0: f64,
    pub fbm_method: FbmMethod,
    pub q: Vec<f64>,
    pub max_lag: i64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        let sim = SimConfig::default();
        SimulateSettings {
            model: SimModel::default(),
            hurst: None,
            nu: None,
            alpha: None,
            mean_level: None,
            x0: None,
            days: sim.n_days,
            steps_per_day: sim.steps_per_day,
            seed: sim.seed,
            scheme: sim.scheme,
            window_hours: sim.window_hours,
            p0: sim.p0,
            fbm_method: sim.fbm_method,
            q: DEFAULT_Q_GRID.to_vec(),
            max_lag: DEFAULT_MAX_LAG,
        }
    }
}

impl SimulateSettings {
    /// Fills unset model parameters with the model's defaults. x0 defaults
    /// to the mean level.
    pub fn resolve(&mut self) -> CliResult<()> {
        if self.model == SimModel::FsvVsRfsv {
            if self.hurst.is_some() || self.nu.is_some() || self.alpha.is_some() || self.mean_level.is_some() {
                return Err(CliError::usage(
                    "fsv-vs-rfsv runs the two fixed comparison models; drop the model parameters",
                ));
            }
            return Ok(());
        }
        let d: FouParams<f64> = match self.model {
            SimModel::Fsv => FouParams::fsv_comparison(),
            _ => FouParams::rfsv_index(),
        };
        self.hurst = self.hurst.or(Some(d.hurst));
        self.nu = self.nu.or(Some(d.nu));
        self.alpha = self.alpha.or(Some(d.alpha));
        self.mean_level = self.mean_level.or(Some(d.mean_level));
        self.x0 = self.x0.or(self.mean_level);
        Ok(())
    }

    pub fn params(&self) -> CliResult<FouParams<f64>> {
        let get = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::usage(format!("{name} is not set")));
        Ok(FouParams::new(
            get(self.hurst, "h")?,
            get(self.nu, "nu")?,
            get(self.alpha, "alpha")?,
            get(self.mean_level, "m")?,
            get(self.x0, "x0")?,
        )?)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n_days: self.days,
            steps_per_day: self.steps_per_day,
            p0: self.p0,
            seed: self.seed,
            window_hours: self.window_hours,
            scheme: self.scheme,
            fbm_method: self.fbm_method,
            ..SimConfig::default()
        }
    }

    pub fn scaling_config(&self) -> ScalingConfig<f64> {
        ScalingConfig::default().with_q(self.q.iter().copied()).with_lags(1..=self.max_lag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackChoice {
    LogVariance,
    Variance,
    #[default]
    Both,
}

impl TrackChoice {
    pub fn tracks(self) -> Vec<Track> {
        match self {
            TrackChoice::LogVariance => vec![Track::LogVariance],
            TrackChoice::Variance => vec![Track::Variance],
            TrackChoice::Both => vec![Track::LogVariance, Track::Variance],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSettings {
    pub models: Vec<ForecastModel>,
    pub horizons: Vec<usize>,
    pub track: TrackChoice,
    pub window: usize,
    pub start: usize,
    pub epsilon: f64,
    pub hurst: Option<f64>,
    pub nu_squared: Option<f64>,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        ForecastSettings {
            models: ForecastModel::standard_set(),
            horizons: vec![1, 5, 21],
            track: TrackChoice::Both,
            window: DEFAULT_WINDOW,
            start: DEFAULT_WINDOW,
            epsilon: DEFAULT_EPSILON,
            hurst: None,
            nu_squared: None,
        }
    }
}

impl ForecastSettings {
    pub fn backtest_config(&self) -> BacktestConfig<f64> {
        BacktestConfig {
            models: self.models.clone(),
            horizons: self.horizons.clone(),
            tracks: self.track.tracks(),
            window: self.window,
            start_index: self.start,
            epsilon: self.epsilon,
            hurst: self.hurst,
            nu_squared: self.nu_squared,
            ..BacktestConfig::default()
        }
    }
}
