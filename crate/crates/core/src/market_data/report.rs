use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::io::write_atomic;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "roughvol-report";
pub const REPORT_VERSION: u32 = 1;

/// A persistable analysis result. `KIND` tags the payload in the envelope.
pub trait Report: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

#[derive(Serialize)]
struct EnvelopeOut<'a, R> {
    schema: &'a str,
    version: u32,
    kind: &'a str,
    data: &'a R,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    schema: String,
    version: u32,
    kind: String,
    data: serde_json::Value,
}

/// Saves a report as pretty JSON. Floats are written in shortest round-trip
/// form, so a reload is bit-exact.
pub fn save_report<R: Report>(report: &R, path: impl AsRef<Path>) -> Result<()> {
    let env = EnvelopeOut {
        schema: REPORT_SCHEMA,
        version: REPORT_VERSION,
        kind: R::KIND,
        data: report,
    };
    let mut text = serde_json::to_string_pretty(&env)
        .map_err(|e| Error::MalformedReport(e.to_string()))?;
    text.push('\n');
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn load_report<R: Report>(path: impl AsRef<Path>) -> Result<R> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let env: EnvelopeIn =
        serde_json::from_str(&text).map_err(|e| Error::MalformedReport(e.to_string()))?;
    if env.schema != REPORT_SCHEMA || env.version != REPORT_VERSION {
        return Err(Error::Schema {
            expected: format!("{REPORT_SCHEMA} v{REPORT_VERSION}"),
            found: format!("{} v{}", env.schema, env.version),
        });
    }
    if env.kind != R::KIND {
        return Err(Error::Schema {
            expected: R::KIND.to_string(),
            found: env.kind,
        });
    }
    serde_json::from_value(env.data).map_err(|e| Error::MalformedReport(e.to_string()))
}

/// Reads only the `kind` tag of a saved report.
pub fn peek_report_kind(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let env: EnvelopeIn =
        serde_json::from_str(&text).map_err(|e| Error::MalformedReport(e.to_string()))?;
    if env.schema != REPORT_SCHEMA {
        return Err(Error::Schema {
            expected: REPORT_SCHEMA.to_string(),
            found: env.schema,
        });
    }
    Ok(env.kind)
}
