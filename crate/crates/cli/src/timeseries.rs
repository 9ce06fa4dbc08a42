//! CSV time series with a fixed header per file.
//!
//! | file             | columns                                                        |
//! |------------------|----------------------------------------------------------------|
//! | `invariants.csv` | `time, mass_c<i>…, min_c<i>…, {L2,L4,Linf,H1,H2,Hm}_<field>…,` |
//! |                  | `dissipation, mean_u_x, mean_u_y, force_mean_x, force_mean_y`  |
//! | `radius.csv`     | `time, tau_est, tau_theory, fit_r2, gevrey_norm`               |
//! | `ledger.csv`     | `time, exponent, observed, bound, margin, tau`                 |
//! | `probes.csv`     | `time, gevrey_<j>…` (one column per configured probe)          |
//! | `steps.csv`      | `step, time, dt`                                               |
//!
//! `<field>` is `c0, c1, …` and, for NPE, `omega`. `Hm` is the homogeneous
//! Sobolev norm of the configured order. Failed radius fits are written as
//! `NaN`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use ionflow::diagnostics::{InvariantReport, LedgerRow, RadiusRecord};

use crate::error::{CliError, Result};

pub const RADIUS_HEADER: [&str; 5] = ["time", "tau_est", "tau_theory", "fit_r2", "gevrey_norm"];
pub const LEDGER_HEADER: [&str; 6] = ["time", "exponent", "observed", "bound", "margin", "tau"];
pub const STEPS_HEADER: [&str; 3] = ["step", "time", "dt"];

/// One row of a time-series file.
pub trait TimeseriesRow {
    fn header(&self) -> Vec<String>;
    fn values(&self) -> Vec<f64>;
}

fn field_keys(r: &InvariantReport) -> Vec<String> {
    let mut keys: Vec<String> = (0..r.mass_per_species.len()).map(InvariantReport::species_key).collect();
    if r.norms.contains_key("omega") {
        keys.push("omega".into());
    }
    keys
}

impl TimeseriesRow for InvariantReport {
    fn header(&self) -> Vec<String> {
        let keys = field_keys(self);
        let mut h = vec!["time".to_string()];
        h.extend(keys.iter().filter(|k| *k != "omega").map(|k| format!("mass_{k}")));
        h.extend(keys.iter().filter(|k| *k != "omega").map(|k| format!("min_{k}")));
        for k in &keys {
            for norm in ["L2", "L4", "Linf", "H1", "H2", "Hm"] {
                h.push(format!("{norm}_{k}"));
            }
        }
        h.extend(
            ["dissipation", "mean_u_x", "mean_u_y", "force_mean_x", "force_mean_y"]
                .iter()
                .map(|s| s.to_string()),
        );
        h
    }

    fn values(&self) -> Vec<f64> {
        let mut v = vec![self.time];
        v.extend(&self.mass_per_species);
        v.extend(&self.min_concentration_per_species);
        for k in field_keys(self) {
            let n = &self.norms[&k];
            v.extend([n.l2, n.l4, n.linf, n.h1, n.h2, n.hm]);
        }
        v.push(self.dissipation);
        v.extend(self.mean_velocity);
        v.extend(self.force_mean);
        v
    }
}

impl TimeseriesRow for RadiusRecord {
    fn header(&self) -> Vec<String> {
        RADIUS_HEADER.iter().map(|s| s.to_string()).collect()
    }

    fn values(&self) -> Vec<f64> {
        vec![self.time, self.tau_estimated, self.tau_theory, self.fit_quality, self.gevrey_norm_at_tau]
    }
}

impl TimeseriesRow for LedgerRow {
    fn header(&self) -> Vec<String> {
        LEDGER_HEADER.iter().map(|s| s.to_string()).collect()
    }

    fn values(&self) -> Vec<f64> {
        vec![self.time, self.exponent, self.observed, self.bound, self.margin, self.tau.unwrap_or(f64::NAN)]
    }
}

/// Shortest round-trip decimal form; scientific notation outside a readable range.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Appends rows to a CSV file whose header is fixed at creation.
pub struct SeriesWriter {
    path: PathBuf,
    width: usize,
    writer: csv::Writer<File>,
}

impl SeriesWriter {
    /// Starts a fresh file (truncating any existing one) and writes the header.
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = Self::wrap(path, header.len(), file);
        w.writer.write_record(header).map_err(|e| csv_error(path, e))?;
        w.flush()?;
        Ok(w)
    }

    /// Opens for appending. An existing non-empty file must carry exactly
    /// `header`; an empty or missing one gets it written.
    pub fn open_append(path: &Path, header: &[String]) -> Result<Self> {
        let existing = read_header(path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        let mut w = Self::wrap(path, header.len(), file);
        match existing {
            Some(h) if h == header => {}
            Some(h) => {
                return Err(CliError::Schema {
                    path: path.to_path_buf(),
                    detail: format!("file has columns [{}], row has [{}]", h.join(","), header.join(",")),
                })
            }
            None => {
                w.writer.write_record(header).map_err(|e| csv_error(path, e))?;
                w.flush()?;
            }
        }
        Ok(w)
    }

    fn wrap(path: &Path, width: usize, file: File) -> Self {
        Self {
            path: path.to_path_buf(),
            width,
            writer: csv::WriterBuilder::new().has_headers(false).from_writer(file),
        }
    }

    pub fn append(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.width {
            return Err(CliError::Schema {
                path: self.path.clone(),
                detail: format!("row has {} values, header has {}", values.len(), self.width),
            });
        }
        self.writer
            .write_record(values.iter().map(|&v| format_value(v)))
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

impl Drop for SeriesWriter {
    fn drop(&mut self) {
        let _ = self.writer.flush();
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

fn read_header(path: &Path) -> Result<Option<Vec<String>>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let mut line = String::new();
    BufReader::new(file).read_line(&mut line).map_err(|e| CliError::io(path, e))?;
    let line = line.trim_end_matches(['\n', '\r']);
    if line.is_empty() {
        return Ok(None);
    }
    Ok(Some(line.split(',').map(str::to_string).collect()))
}

/// Appends one report to `path`, writing the header on first use.
pub fn timeseries_append(row: &dyn TimeseriesRow, path: &Path) -> Result<()> {
    let mut w = SeriesWriter::open_append(path, &row.header())?;
    w.append(&row.values())?;
    w.flush()
}

/// Reads a CSV written by this module: header plus numeric rows.
pub fn read_series(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| CliError::Data {
                    path: path.to_path_buf(),
                    detail: format!("non-numeric value `{s}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
