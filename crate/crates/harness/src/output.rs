//! Columnar result tables, their CSV/JSON encodings and the run metadata.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which re-parses to
//! the identical `f64`.

use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "x", "u", "V", "dis"];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| HarnessError::io(path, format!("bad number `{s}`: {e}")))
}

/// One trajectory row: position, velocity (or `⟨p⟩/m`), `V` at the position, disruptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub dis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    /// `t` is a step index (written as an integer) rather than a time.
    pub step_indexed: bool,
    pub rows: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySnapshot {
    pub t: f64,
    pub rho: Vec<f64>,
}

/// Density snapshots sharing one grid; CSV columns `x, rho_t0, rho_t1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub snapshots: Vec<DensitySnapshot>,
}

impl DensityTable {
    /// Position of the density maximum in snapshot `i`.
    pub fn argmax(&self, i: usize) -> f64 {
        let rho = &self.snapshots[i].rho;
        let mut best = 0;
        for (j, v) in rho.iter().enumerate() {
            if *v > rho[best] {
                best = j;
            }
        }
        self.x[best]
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// A table of named float columns, used for observables, differences and oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ColumnTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e))
}

fn write_record<I, T>(w: &mut csv::Writer<fs::File>, record: I, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(record).map_err(|e| HarnessError::io(path, e))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn header_of(r: &mut csv::Reader<fs::File>, path: &Path) -> Result<Vec<String>> {
    Ok(r.headers()
        .map_err(|e| HarnessError::io(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

impl TrajectoryTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        write_record(&mut w, TRAJECTORY_HEADER, path)?;
        for r in &self.rows {
            let t = if self.step_indexed {
                format!("{}", r.t as u64)
            } else {
                format_float(r.t)
            };
            let fields = [t, format_float(r.x), format_float(r.u), format_float(r.v), format_float(r.dis)];
            write_record(&mut w, &fields, path)?;
        }
        finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv_reader(path)?;
        if header_of(&mut r, path)? != TRAJECTORY_HEADER {
            return Err(HarnessError::io(path, "unexpected trajectory header"));
        }
        let mut rows = Vec::new();
        let mut step_indexed = true;
        for rec in r.records() {
            let rec = rec.map_err(|e| HarnessError::io(path, e))?;
            if rec.len() != 5 {
                return Err(HarnessError::io(path, "trajectory rows need 5 fields"));
            }
            if rec[0].contains(['.', 'e', 'E']) {
                step_indexed = false;
            }
            let f = |i: usize| parse_float(&rec[i], path);
            rows.push(TrajectoryRow {
                t: f(0)?,
                x: f(1)?,
                u: f(2)?,
                v: f(3)?,
                dis: f(4)?,
            });
        }
        Ok(Self { step_indexed, rows })
    }
}

impl DensityTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let header: Vec<String> = std::iter::once("x".to_string())
            .chain((0..self.snapshots.len()).map(|i| format!("rho_t{i}")))
            .collect();
        write_record(&mut w, &header, path)?;
        for (j, x) in self.x.iter().enumerate() {
            let row: Vec<String> = std::iter::once(format_float(*x))
                .chain(self.snapshots.iter().map(|s| format_float(s.rho[j])))
                .collect();
            write_record(&mut w, &row, path)?;
        }
        finish(w, path)
    }

    /// Reads the CSV; snapshot times live in the metadata and are supplied here.
    pub fn read_csv(path: &Path, times: &[f64]) -> Result<Self> {
        let mut r = csv_reader(path)?;
        let header = header_of(&mut r, path)?;
        if header.first().map(String::as_str) != Some("x") || header.len() != times.len() + 1 {
            return Err(HarnessError::io(path, "density header does not match the snapshot times"));
        }
        let mut x = Vec::new();
        let mut snapshots: Vec<DensitySnapshot> = times
            .iter()
            .map(|&t| DensitySnapshot { t, rho: Vec::new() })
            .collect();
        for rec in r.records() {
            let rec = rec.map_err(|e| HarnessError::io(path, e))?;
            x.push(parse_float(&rec[0], path)?);
            for (k, s) in snapshots.iter_mut().enumerate() {
                s.rho.push(parse_float(&rec[k + 1], path)?);
            }
        }
        Ok(Self { x, snapshots })
    }
}

impl ColumnTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        write_record(&mut w, &self.columns, path)?;
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            write_record(&mut w, &fields, path)?;
        }
        finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv_reader(path)?;
        let columns = header_of(&mut r, path)?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| HarnessError::io(path, e))?;
            rows.push(rec.iter().map(|s| parse_float(s, path)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { columns, rows })
    }
}

/// One sweep point: the varied value and how its run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub status: String,
    /// Learner steps or propagator steps taken.
    pub steps: usize,
    pub final_x: f64,
    pub final_u: f64,
    #[serde(rename = "final_V")]
    pub final_v: f64,
}

pub const SWEEP_HEADER: [&str; 7] = ["index", "value", "status", "steps", "final_x", "final_u", "final_V"];

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_record(&mut w, SWEEP_HEADER, path)?;
    for r in rows {
        let fields = [
            r.index.to_string(),
            format_float(r.value),
            r.status.clone(),
            r.steps.to_string(),
            format_float(r.final_x),
            format_float(r.final_u),
            format_float(r.final_v),
        ];
        write_record(&mut w, &fields, path)?;
    }
    finish(w, path)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv_reader(path)?;
    if header_of(&mut r, path)? != SWEEP_HEADER {
        return Err(HarnessError::io(path, "unexpected sweep header"));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| HarnessError::io(path, e))?;
        if rec.len() != SWEEP_HEADER.len() {
            return Err(HarnessError::io(path, "sweep rows need 7 fields"));
        }
        let int = |i: usize| {
            rec[i]
                .parse::<usize>()
                .map_err(|e| HarnessError::io(path, format!("bad integer `{}`: {e}", &rec[i])))
        };
        rows.push(SweepRow {
            index: int(0)?,
            value: parse_float(&rec[1], path)?,
            status: rec[2].to_string(),
            steps: int(3)?,
            final_x: parse_float(&rec[4], path)?,
            final_u: parse_float(&rec[5], path)?,
            final_v: parse_float(&rec[6], path)?,
        });
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}
