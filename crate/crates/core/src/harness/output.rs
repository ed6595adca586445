//! Deterministic serialization of reports and curve tables.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::harness::spectrum::CurveRow;

pub const REPORT_FILE: &str = "report.json";
pub const CURVE_FILE: &str = "spectrum.csv";

/// Round to a multiple of 1e-12, with −0 mapped to 0.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = round12(num.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and floats rounded to 1e-12.
pub fn to_rounded_json<T: Serialize>(report: &T) -> Result<String> {
    let value = serde_json::to_value(report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&round_value(value)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

pub fn write_curves(rows: &[CurveRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["u_re", "u_im", "sector", "lambda_re", "lambda_im", "ed_re", "ed_im", "abs_err"])
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
    for r in rows {
        let f = |x: f64| format!("{:e}", round12(x));
        w.write_record([
            f(r.u_re),
            f(r.u_im),
            r.sector.clone(),
            f(r.lambda_re),
            f(r.lambda_im),
            f(r.ed_re),
            f(r.ed_im),
            f(r.abs_err),
        ])
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
    }
    w.flush().map_err(io(path))
}

/// Write `report.json` into `dir`, creating it if needed.
pub fn write_report<T: Serialize>(report: &T, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let json = dir.join(REPORT_FILE);
    std::fs::write(&json, to_rounded_json(report)?).map_err(io(&json))
}

/// Write `report.json` and `spectrum.csv` into `dir`.
pub fn emit_results<T: Serialize>(report: &T, curves: &[CurveRow], dir: &Path) -> Result<()> {
    write_report(report, dir)?;
    write_curves(curves, &dir.join(CURVE_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_normalizes_negative_zero() {
        assert_eq!(round12(-1e-14).to_bits(), 0.0f64.to_bits());
        assert_eq!(round12(0.1234567890123456), 0.123456789012);
    }

    #[test]
    fn keys_are_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: f64,
        }
        let text = to_rounded_json(&S { zeta: 1.0, alpha: 2.0 }).unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }
}
