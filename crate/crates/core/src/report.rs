//! Flat JSON records for statistics checked against a threshold.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub statistic: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl StatRecord {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(statistic: &str, n: usize, samples: usize, value: f64, threshold: f64) -> Self {
        Self {
            statistic: statistic.to_string(),
            n,
            samples,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(statistic: &str, n: usize, samples: usize, value: f64, threshold: f64) -> Self {
        Self {
            pass: value >= threshold,
            ..Self::at_most(statistic, n, samples, value, threshold)
        }
    }
}

/// One record per line.
pub fn write_records<W: Write>(records: &[StatRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}

/// Reads JSON lines, a single record, or an array of records.
pub fn read_records<R: BufRead>(mut r: R) -> Result<Vec<StatRecord>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| Error::Format {
            line: e.line(),
            message: e.to_string(),
        });
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
