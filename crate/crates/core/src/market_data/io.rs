use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;

use super::types::{OhlcBar, OhlcSeries, ProxyKind, VolPoint, VolSeries};
use crate::error::{Error, Result, RowError};
use crate::scalar::Real;

const OHLC_HEADER: [&str; 5] = ["date", "open", "high", "low", "close"];
const VOL_HEADER: [&str; 4] = ["ticker", "proxy", "date", "sigma"];

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn ticker_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn parse_num<T: Real>(field: &str, name: &str) -> std::result::Result<T, String> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("{name}: cannot parse '{field}'"))?;
    Ok(T::lit(v))
}

fn parse_date(field: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d")
        .map_err(|_| format!("date: expected YYYY-MM-DD, got '{field}'"))
}

/// Reads an OHLC CSV (`date,open,high,low,close`). Every bad row is reported,
/// not just the first one.
pub fn load_ohlc<T: Real>(path: impl AsRef<Path>) -> Result<OhlcSeries<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut rows = Vec::new();
    let mut bars: Vec<OhlcBar<T>> = Vec::new();
    let mut saw_header = false;

    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rows.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if !saw_header {
            saw_header = true;
            let fields: Vec<&str> = record.iter().map(str::trim).collect();
            if fields != OHLC_HEADER {
                rows.push(RowError {
                    line,
                    message: format!(
                        "header must be exactly '{}', got '{}'",
                        OHLC_HEADER.join(","),
                        fields.join(",")
                    ),
                });
                break;
            }
            continue;
        }
        if record.len() != OHLC_HEADER.len() {
            rows.push(RowError {
                line,
                message: format!("expected 5 fields, found {}", record.len()),
            });
            continue;
        }
        let parsed = (|| -> std::result::Result<OhlcBar<T>, String> {
            let date = parse_date(&record[0])?;
            let bar = OhlcBar {
                date,
                open: parse_num(&record[1], "open")?,
                high: parse_num(&record[2], "high")?,
                low: parse_num(&record[3], "low")?,
                close: parse_num(&record[4], "close")?,
            };
            bar.check().map_err(|r| format!("{date}: {r}"))?;
            Ok(bar)
        })();
        match parsed {
            Ok(bar) => {
                if let Some(prev) = bars.last() {
                    if bar.date == prev.date {
                        rows.push(RowError {
                            line,
                            message: format!("duplicate date {}", bar.date),
                        });
                        continue;
                    }
                    if bar.date < prev.date {
                        rows.push(RowError {
                            line,
                            message: format!(
                                "date {} not after previous date {}",
                                bar.date, prev.date
                            ),
                        });
                        continue;
                    }
                }
                bars.push(bar);
            }
            Err(message) => rows.push(RowError { line, message }),
        }
    }
    if !saw_header {
        rows.push(RowError {
            line: 1,
            message: "empty file, missing header".into(),
        });
    }
    if !rows.is_empty() {
        return Err(Error::InvalidRows {
            path: path.to_path_buf(),
            rows,
        });
    }
    OhlcSeries::new(ticker_from_path(path), bars)
}

pub fn save_ohlc<T: Real>(series: &OhlcSeries<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 64);
    out.push_str(&OHLC_HEADER.join(","));
    out.push('\n');
    for b in series.bars() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            b.date.format("%Y-%m-%d"),
            b.open,
            b.high,
            b.low,
            b.close
        ));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

/// Writes a volatility series as tidy CSV: `ticker,proxy,date,sigma`.
pub fn save_vol_series<T: Real>(series: &VolSeries<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 48);
    out.push_str(&VOL_HEADER.join(","));
    out.push('\n');
    for p in series.points() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            series.ticker(),
            series.proxy(),
            p.date.format("%Y-%m-%d"),
            p.sigma
        ));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

pub fn load_vol_series<T: Real>(path: impl AsRef<Path>) -> Result<VolSeries<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::InvalidRows {
            path: path.to_path_buf(),
            rows: vec![RowError {
                line: 1,
                message: e.to_string(),
            }],
        })?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header != VOL_HEADER {
        return Err(Error::InvalidRows {
            path: path.to_path_buf(),
            rows: vec![RowError {
                line: 1,
                message: format!("header must be exactly '{}'", VOL_HEADER.join(",")),
            }],
        });
    }

    let mut rows = Vec::new();
    let mut ticker: Option<String> = None;
    let mut proxy: Option<ProxyKind> = None;
    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let parsed = record
            .map_err(|e| e.to_string())
            .and_then(|r| -> std::result::Result<_, String> {
                let kind: ProxyKind = r[1].trim().parse().map_err(|e: Error| e.to_string())?;
                let date = parse_date(&r[2])?;
                let sigma: T = parse_num(&r[3], "sigma")?;
                Ok((r[0].trim().to_string(), kind, date, sigma))
            });
        match parsed {
            Ok((t, k, date, sigma)) => {
                if ticker.get_or_insert_with(|| t.clone()) != &t {
                    rows.push(RowError {
                        line,
                        message: format!("mixed tickers in one file ('{t}')"),
                    });
                    continue;
                }
                if *proxy.get_or_insert(k) != k {
                    rows.push(RowError {
                        line,
                        message: format!("mixed proxies in one file ('{k}')"),
                    });
                    continue;
                }
                points.push(VolPoint { date, sigma });
            }
            Err(message) => rows.push(RowError { line, message }),
        }
    }
    if !rows.is_empty() {
        return Err(Error::InvalidRows {
            path: path.to_path_buf(),
            rows,
        });
    }
    VolSeries::new(
        ticker.unwrap_or_else(|| ticker_from_path(path)),
        proxy.unwrap_or(ProxyKind::SimulatedTruth),
        points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_well_formed_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "SPX.csv",
            "date,open,high,low,close\n\
             2015-04-16,100,101,99,100.5\n\
             2015-04-17,100.5,102,100,101\n\
             2015-04-20,101,101.5,99.5,100\n",
        );
        let s: OhlcSeries<f64> = load_ohlc(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.ticker(), "SPX");
        assert_eq!(s.bars()[2].low, 99.5);
    }

    #[test]
    fn reports_every_bad_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "bad.csv",
            "date,open,high,low,close\n\
             2015-04-16,100,101,99,101.5\n\
             2015-04-17,100.5,102,100,101\n\
             2015-04-17,100.5,102,100,101\n\
             2015-04-20,-1,101.5,99.5,100\n",
        );
        let err = load_ohlc::<f64>(&p).unwrap_err();
        let Error::InvalidRows { rows, .. } = err else {
            panic!("expected row errors")
        };
        let lines: Vec<usize> = rows.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 4, 5]);
        assert!(rows[0].message.contains("high"));
        assert!(rows[1].message.contains("duplicate date 2015-04-17"));
        assert!(rows[2].message.contains("non-positive"));
    }

    #[test]
    fn rejects_wrong_header_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", "Date,Open,High,Low,Close\n");
        assert!(matches!(load_ohlc::<f64>(&p), Err(Error::InvalidRows { .. })));
        assert!(matches!(
            load_ohlc::<f64>(dir.path().join("nope.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn rejects_descending_dates() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "d.csv",
            "date,open,high,low,close\n2015-04-17,1,1,1,1\n2015-04-16,1,1,1,1\n",
        );
        let Err(Error::InvalidRows { rows, .. }) = load_ohlc::<f64>(&p) else {
            panic!()
        };
        assert_eq!(rows[0].line, 3);
    }

    #[test]
    fn vol_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let pts: Vec<VolPoint<f64>> = (0..5)
            .map(|i| VolPoint {
                date: d0 + chrono::Duration::days(i),
                sigma: 0.01 * (1.0 + i as f64 / 7.0),
            })
            .collect();
        let s = VolSeries::new("ABC", ProxyKind::Parkinson, pts).unwrap();
        save_vol_series(&s, &p).unwrap();
        assert_eq!(load_vol_series::<f64>(&p).unwrap(), s);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn ohlc_round_trip(
            raw in proptest::collection::vec((1e-3f64..1e4, 0.0f64..0.1, 0.0f64..0.1, 0.0f64..1.0, 1i64..5), 1..40)
        ) {
            let mut date = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
            let bars: Vec<OhlcBar<f64>> = raw.iter().map(|&(open, up, down, frac, gap)| {
                date += chrono::Duration::days(gap);
                let high = open * (1.0 + up);
                let low = open / (1.0 + down);
                let close = low + frac * (high - low);
                OhlcBar { date, open, high, low, close }
            }).collect();
            let series = OhlcSeries::new("RT", bars).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("RT.csv");
            save_ohlc(&series, &p).unwrap();
            prop_assert_eq!(load_ohlc::<f64>(&p).unwrap(), series);
        }
    }
}
