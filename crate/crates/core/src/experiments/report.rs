//! CSV and NDJSON writers shared by the runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shortest round-trip text for a float; empty for a missing value.
pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:e}"),
        None => String::new(),
    }
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Shape(format!(
                "row has {} cells, header has {}",
                r.len(),
                header.len()
            )));
        }
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_numeric_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|x| fmt_value(Some(*x))).collect())
        .collect();
    write_table(path, header, &rows)
}

/// Newline-delimited JSON event log.
pub struct EventLog {
    out: BufWriter<File>,
}

impl EventLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(EventLog {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn emit(&mut self, event: serde_json::Value) -> Result<()> {
        serde_json::to_writer(&mut self.out, &event).map_err(|e| Error::Io(e.into()))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than two usable points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `ys[i+1] < ys[i]` for all consecutive pairs, given the xs are ordered as in the sweep.
pub fn strictly_decreasing(ys: &[f64]) -> bool {
    ys.len() >= 2 && ys.windows(2).all(|w| w[1] < w[0])
}
