//! OHLC ingestion, volatility series, calendar lags and report persistence.

mod io;
mod report;
mod types;

pub use io::{load_ohlc, load_vol_series, save_ohlc, save_vol_series, write_atomic};
pub use report::{load_report, peek_report_kind, save_report, Report, REPORT_SCHEMA, REPORT_VERSION};
pub use types::{OhlcBar, OhlcSeries, ProxyKind, VolPoint, VolSeries};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Calendar-day difference `b - a`. A Friday to the following Monday is three days.
pub fn calendar_lag(a: NaiveDate, b: NaiveDate) -> Result<i64> {
    if a >= b {
        return Err(Error::InvalidArgument(format!(
            "calendar_lag requires {a} < {b}"
        )));
    }
    Ok((b - a).num_days())
}
