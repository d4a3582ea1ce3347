use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One trading day of open/high/low/close prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OhlcBar<T> {
    pub date: NaiveDate,
    pub open: T,
    pub high: T,
    pub low: T,
    pub close: T,
}

impl<T: Real> OhlcBar<T> {
    /// Builds a bar, enforcing positivity and the high/low envelope.
    pub fn new(date: NaiveDate, open: T, high: T, low: T, close: T) -> Result<Self> {
        let bar = OhlcBar {
            date,
            open,
            high,
            low,
            close,
        };
        bar.check().map_err(|reason| Error::InvalidBar { date, reason })?;
        Ok(bar)
    }

    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err("non-finite price".into());
        }
        if prices.iter().any(|&p| p <= T::zero()) {
            return Err("non-positive price".into());
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} below max(open, close) = {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} above min(open, close) = {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        Ok(())
    }
}

/// A validated, strictly date-ordered sequence of bars for one ticker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawOhlcSeries<T>")]
pub struct OhlcSeries<T> {
    ticker: String,
    bars: Vec<OhlcBar<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawOhlcSeries<T> {
    ticker: String,
    bars: Vec<OhlcBar<T>>,
}

impl<T: Real> TryFrom<RawOhlcSeries<T>> for OhlcSeries<T> {
    type Error = Error;

    fn try_from(raw: RawOhlcSeries<T>) -> Result<Self> {
        OhlcSeries::new(raw.ticker, raw.bars)
    }
}

impl<T: Real> OhlcSeries<T> {
    pub fn new(ticker: impl Into<String>, bars: Vec<OhlcBar<T>>) -> Result<Self> {
        for bar in &bars {
            bar.check().map_err(|reason| Error::InvalidBar {
                date: bar.date,
                reason,
            })?;
        }
        check_dates(bars.iter().map(|b| b.date))?;
        Ok(OhlcSeries {
            ticker: ticker.into(),
            bars,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn bars(&self) -> &[OhlcBar<T>] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Close-to-close log returns, dated by the later bar.
    pub fn log_returns(&self) -> Vec<(NaiveDate, T)> {
        self.bars
            .windows(2)
            .map(|w| (w[1].date, (w[1].close / w[0].close).ln()))
            .collect()
    }
}

pub(crate) fn check_dates(dates: impl Iterator<Item = NaiveDate>) -> Result<()> {
    let mut prev: Option<NaiveDate> = None;
    for d in dates {
        if let Some(p) = prev {
            if d == p {
                return Err(Error::DuplicateDate(d));
            }
            if d < p {
                return Err(Error::NonMonotoneDates(d));
            }
        }
        prev = Some(d);
    }
    Ok(())
}

/// Which estimator produced a volatility series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyKind {
    CloseToClose,
    Parkinson,
    GarmanKlassPractical,
    GarmanKlassFull,
    RogersSatchell,
    RealizedVolatility,
    SimulatedTruth,
}

impl ProxyKind {
    pub const ALL: [ProxyKind; 7] = [
        ProxyKind::CloseToClose,
        ProxyKind::Parkinson,
        ProxyKind::GarmanKlassPractical,
        ProxyKind::GarmanKlassFull,
        ProxyKind::RogersSatchell,
        ProxyKind::RealizedVolatility,
        ProxyKind::SimulatedTruth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProxyKind::CloseToClose => "close-to-close",
            ProxyKind::Parkinson => "parkinson",
            ProxyKind::GarmanKlassPractical => "garman-klass-practical",
            ProxyKind::GarmanKlassFull => "garman-klass-full",
            ProxyKind::RogersSatchell => "rogers-satchell",
            ProxyKind::RealizedVolatility => "realized-volatility",
            ProxyKind::SimulatedTruth => "simulated-truth",
        }
    }

    /// True for estimators computable from a single OHLC bar history.
    pub fn is_range_based(self) -> bool {
        !matches!(
            self,
            ProxyKind::RealizedVolatility | ProxyKind::SimulatedTruth
        )
    }
}

impl fmt::Display for ProxyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProxyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "close-to-close" | "cc" => ProxyKind::CloseToClose,
            "parkinson" | "p" => ProxyKind::Parkinson,
            "garman-klass-practical" | "gk-practical" | "gk" => ProxyKind::GarmanKlassPractical,
            "garman-klass-full" | "gk-full" => ProxyKind::GarmanKlassFull,
            "rogers-satchell" | "rs" => ProxyKind::RogersSatchell,
            "realized-volatility" | "rv" => ProxyKind::RealizedVolatility,
            "simulated-truth" | "truth" => ProxyKind::SimulatedTruth,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown estimator '{other}'"
                )))
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VolPoint<T> {
    pub date: NaiveDate,
    /// Volatility per square-root day.
    pub sigma: T,
}

/// Dated daily volatility values from one proxy. Every sigma is finite and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawVolSeries<T>")]
pub struct VolSeries<T> {
    ticker: String,
    proxy: ProxyKind,
    points: Vec<VolPoint<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawVolSeries<T> {
    ticker: String,
    proxy: ProxyKind,
    points: Vec<VolPoint<T>>,
}

impl<T: Real> TryFrom<RawVolSeries<T>> for VolSeries<T> {
    type Error = Error;

    fn try_from(raw: RawVolSeries<T>) -> Result<Self> {
        VolSeries::new(raw.ticker, raw.proxy, raw.points)
    }
}

impl<T: Real> VolSeries<T> {
    pub fn new(
        ticker: impl Into<String>,
        proxy: ProxyKind,
        points: Vec<VolPoint<T>>,
    ) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(p.sigma > T::zero()) || !p.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "volatility on {} must be finite and positive, got {}",
                p.date, p.sigma
            )));
        }
        check_dates(points.iter().map(|p| p.date))?;
        Ok(VolSeries {
            ticker: ticker.into(),
            proxy,
            points,
        })
    }

    /// Builds from log-volatility values, e.g. a simulated log-vol path.
    pub fn from_log_vol(
        ticker: impl Into<String>,
        proxy: ProxyKind,
        dates: &[NaiveDate],
        log_vol: &[T],
    ) -> Result<Self> {
        if dates.len() != log_vol.len() {
            return Err(Error::InvalidArgument(format!(
                "{} dates for {} values",
                dates.len(),
                log_vol.len()
            )));
        }
        let points = dates
            .iter()
            .zip(log_vol)
            .map(|(&date, &x)| VolPoint {
                date,
                sigma: x.exp(),
            })
            .collect();
        Self::new(ticker, proxy, points)
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn proxy(&self) -> ProxyKind {
        self.proxy
    }

    pub fn points(&self) -> &[VolPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.date).collect()
    }

    pub fn sigmas(&self) -> Vec<T> {
        self.points.iter().map(|p| p.sigma).collect()
    }

    pub fn log_vol(&self) -> Vec<T> {
        self.points.iter().map(|p| p.sigma.ln()).collect()
    }

    /// log sigma^2 at every point.
    pub fn log_variance(&self) -> Vec<T> {
        let two = T::lit(2.0);
        self.points.iter().map(|p| two * p.sigma.ln()).collect()
    }

    pub fn variance(&self) -> Vec<T> {
        self.points.iter().map(|p| p.sigma * p.sigma).collect()
    }

    /// Contiguous sub-series `[start, end)` by index.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        VolSeries {
            ticker: self.ticker.clone(),
            proxy: self.proxy,
            points: self.points[start..end].to_vec(),
        }
    }

    /// Multiplies every sigma by a positive constant.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| VolPoint {
                date: p.date,
                sigma: p.sigma * factor,
            })
            .collect();
        Self::new(self.ticker.clone(), self.proxy, points)
    }
}
