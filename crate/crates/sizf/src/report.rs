//! Deterministic report serialization.
//!
//! JSON reports are UTF-8 with keys sorted (values are routed through
//! `serde_json::Value`, whose object map is ordered); CSV uses `.` decimals,
//! `\n` line endings, and a header row. Identical runs produce byte-identical
//! reports regardless of thread count.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::range::GramianReport;

/// Serializes any report as pretty JSON with sorted keys and a trailing
/// newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes a JSON report to `path`, or to stdout when `path` is `None`.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// CSV table of per-σ bounds: one `σ` column per torus axis, then the lower
/// and upper bounds.
pub fn bounds_csv(report: &GramianReport) -> String {
    let r = report
        .per_sigma
        .first()
        .map(|row| row.sigma.len())
        .unwrap_or(0);
    let mut out = String::new();
    for axis in 0..r {
        out.push_str(&format!("sigma_{axis},"));
    }
    out.push_str("lower,upper,rank\n");
    for row in &report.per_sigma {
        for v in &row.sigma {
            out.push_str(&format!("{v},"));
        }
        match row.lower {
            Some(a) => out.push_str(&format!("{a},")),
            None => out.push(','),
        }
        out.push_str(&format!("{},{}\n", row.upper, row.rank));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Sample {
        zulu: u32,
        alpha: &'static str,
        mid: f64,
    }

    #[test]
    fn json_keys_are_sorted() {
        let text = to_json(&Sample {
            zulu: 1,
            alpha: "x",
            mid: 0.5,
        })
        .unwrap();
        let a = text.find("\"alpha\"").unwrap();
        let m = text.find("\"mid\"").unwrap();
        let z = text.find("\"zulu\"").unwrap();
        assert!(a < m && m < z, "{text}");
        assert!(text.ends_with('\n'));
    }
}
