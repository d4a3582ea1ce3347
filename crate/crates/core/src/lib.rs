//! Rough volatility toolkit: range-based volatility proxies, log-volatility
//! scaling analysis, fractional Brownian motion, an RFSV market simulator and
//! log-volatility forecasters.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`; the `*32` aliases fix it to `f32`.

pub mod error;
pub mod fbm_engine;
pub mod forecaster;
pub mod market_data;
pub mod numerics;
pub mod range_proxies;
pub mod rfsv_simulator;
pub mod rng;
pub mod scaling_lab;
pub mod scalar;

pub use error::{Error, Result, RowError};
pub use fbm_engine::FbmMethod;
pub use market_data::{calendar_lag, ProxyKind};
pub use scalar::Real;

pub type OhlcBar = market_data::OhlcBar<f64>;
pub type OhlcSeries = market_data::OhlcSeries<f64>;
pub type VolPoint = market_data::VolPoint<f64>;
pub type VolSeries = market_data::VolSeries<f64>;
pub type ProxyComparison = range_proxies::ProxyComparison<f64>;

pub type FbmPath = fbm_engine::FbmPath<f64>;

pub type BacktestReport = forecaster::BacktestReport<f64>;
pub type FouParams = rfsv_simulator::FouParams<f64>;
pub type SimulatedMarket = rfsv_simulator::SimulatedMarket<f64>;
pub type ScalingReport = scaling_lab::ScalingReport<f64>;

pub type OhlcBar32 = market_data::OhlcBar<f32>;
pub type OhlcSeries32 = market_data::OhlcSeries<f32>;
pub type VolSeries32 = market_data::VolSeries<f32>;
