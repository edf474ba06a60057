//! CSV and JSON artifacts: snapshots, the trace and run metadata.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use mixzone::GridFunction1D;
use serde::Serialize;

/// 17 significant digits, enough for a lossless f64 round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_name(t: f64) -> String {
    format!("f_{t:.6}.csv")
}

pub fn write_snapshot(path: &Path, f: &GridFunction1D) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "f"])?;
    for (j, v) in f.samples().iter().enumerate() {
        w.write_record([fmt_f64(f.x(j)), fmt_f64(*v)])?;
    }
    w.flush()
}

/// Read an (x, f) snapshot. The period is recovered from the first abscissa,
/// x₀ = −L/2, and the spacing is checked against L/N.
pub fn read_snapshot(path: &Path) -> io::Result<GridFunction1D> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "f"] {
        return Err(bad(format!("expected header x,f, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> io::Result<f64> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(format!("row {}: column {} is not a number", i + 2, k + 1)))
        };
        xs.push(parse(0)?);
        fs.push(parse(1)?);
    }
    let n = xs.len();
    if n < 2 {
        return Err(bad("snapshot needs at least two rows".into()));
    }
    let length = -2.0 * xs[0];
    let h = length / n as f64;
    if let Some(j) = (0..n).find(|&j| (xs[j] - (xs[0] + j as f64 * h)).abs() > 1e-9 * length) {
        return Err(bad(format!("row {}: abscissa off the uniform grid x_j = -L/2 + jL/N", j + 2)));
    }
    GridFunction1D::new(fs, length).map_err(|e| bad(e.to_string()))
}

/// One trace line per output time with a mixing zone (t > 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub t: f64,
    pub l2_norm: f64,
    pub h4_norm: f64,
    pub energy: f64,
    pub max_abs_gamma: f64,
    pub min_hull_slack: f64,
    pub m_bound: f64,
    pub zero_mean_residual: f64,
}

pub const TRACE_COLUMNS: [&str; 8] =
    ["t", "l2_norm", "h4_norm", "energy", "max_abs_gamma", "min_hull_slack", "m_bound", "zero_mean_residual"];

pub fn write_trace(path: &Path, rows: &[OutputRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_COLUMNS)?;
    for r in rows {
        let vals = [r.t, r.l2_norm, r.h4_norm, r.energy, r.max_abs_gamma, r.min_hull_slack, r.m_bound, r.zero_mean_residual];
        w.write_record(vals.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")
}
