//! Cartesian parameter sweeps.
//!
//! Each `--axis 'key=v1,v2,…'` names a config key path (`n`, `stepper.dt`,
//! `species[0].D`, `species[*].D`, …). Points are numbered in row-major
//! order (the first axis varies slowest) and run into `point_NNN/`. Every
//! finished point appends one JSON line to `manifest.jsonl`; `--resume`
//! skips points already recorded there.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::config::parse_config;
use crate::error::{exit, CliError, Result};
use crate::runner::{run_config, RunOptions};

pub const MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

fn parse_scalar(s: &str) -> Value {
    let s = s.trim();
    if let Ok(i) = s.parse::<i64>() {
        Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        Value::Float(f)
    } else if let Ok(b) = s.parse::<bool>() {
        Value::Boolean(b)
    } else {
        Value::String(s.trim_matches('"').to_string())
    }
}

/// Parses `key=v1,v2,…`.
pub fn parse_axis(spec: &str) -> Result<Axis> {
    let bad = |msg: &str| CliError::validation("--axis", format!("`{spec}`: {msg}"));
    let (key, values) = spec.split_once('=').ok_or_else(|| bad("expected key=v1,v2,..."))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(bad("empty key"));
    }
    parse_segments(key)?;
    let values: Vec<Value> = values.split(',').filter(|v| !v.trim().is_empty()).map(parse_scalar).collect();
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(Axis {
        key: key.to_string(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Index {
    At(usize),
    All,
}

fn parse_segments(key: &str) -> Result<Vec<(String, Option<Index>)>> {
    let bad = || CliError::validation("--axis", format!("malformed key path `{key}`"));
    key.split('.')
        .map(|seg| {
            let (name, index) = match seg.split_once('[') {
                None => (seg, None),
                Some((name, rest)) => {
                    let inner = rest.strip_suffix(']').ok_or_else(bad)?;
                    let idx = if inner == "*" {
                        Index::All
                    } else {
                        Index::At(inner.parse().map_err(|_| bad())?)
                    };
                    (name, Some(idx))
                }
            };
            if name.is_empty() {
                return Err(bad());
            }
            Ok((name.to_string(), index))
        })
        .collect()
}

fn set_in(table: &mut Table, segs: &[(String, Option<Index>)], value: &Value, key: &str) -> Result<()> {
    let missing = |what: &str| CliError::validation(key, what.to_string());
    let (name, index) = &segs[0];
    let rest = &segs[1..];
    match index {
        None if rest.is_empty() => {
            let v = match (table.get(name), value) {
                // keep float-typed keys float when the axis value is written as an integer
                (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(*i as f64),
                _ => value.clone(),
            };
            table.insert(name.clone(), v);
            Ok(())
        }
        None => {
            let entry = table.entry(name.clone()).or_insert_with(|| Value::Table(Table::new()));
            let sub = entry.as_table_mut().ok_or_else(|| missing("not a table"))?;
            set_in(sub, rest, value, key)
        }
        Some(idx) => {
            let arr = table
                .get_mut(name)
                .and_then(Value::as_array_mut)
                .ok_or_else(|| missing("not an array in the base config"))?;
            let targets: Vec<usize> = match idx {
                Index::All => (0..arr.len()).collect(),
                Index::At(i) if *i < arr.len() => vec![*i],
                Index::At(i) => return Err(missing(&format!("index {i} out of range (length {})", arr.len()))),
            };
            for i in targets {
                let item = &mut arr[i];
                if rest.is_empty() {
                    *item = value.clone();
                } else {
                    let sub = item.as_table_mut().ok_or_else(|| missing("array element is not a table"))?;
                    set_in(sub, rest, value, key)?;
                }
            }
            Ok(())
        }
    }
}

/// Sets `key` to `value` in a parsed config document.
pub fn apply_axis_value(doc: &mut Table, key: &str, value: &Value) -> Result<()> {
    let segs = parse_segments(key)?;
    set_in(doc, &segs, value, key)
}

/// All points of the Cartesian product, first axis slowest.
pub fn points(axes: &[Axis]) -> Vec<Vec<Value>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub dir: String,
    /// Axis key and value, in axis order.
    pub params: Vec<(String, serde_json::Value)>,
    /// `completed`, `diverged`, `invalid` or `failed`.
    pub status: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ManifestEntry {
    /// Points with a deterministic outcome are not rerun on resume.
    fn is_final(&self) -> bool {
        self.status != "failed"
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|e| CliError::Data {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", lineno + 1),
        })?;
        out.push(entry);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub axes: Vec<Axis>,
    pub resume: bool,
    pub workers: usize,
    pub cadence: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSummary {
    pub points: usize,
    pub skipped: usize,
    pub completed: usize,
    pub diverged: usize,
    pub invalid: usize,
    pub failed: usize,
}

impl SweepSummary {
    /// Divergent points are results, not failures of the sweep.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            exit::IO
        } else if self.invalid > 0 {
            exit::VALIDATION
        } else {
            exit::SUCCESS
        }
    }
}

fn run_point(base: &Table, axes: &[Axis], values: &[Value], dir: &Path, opts: &SweepOptions) -> (String, i32, Option<String>) {
    let mut doc = base.clone();
    let prepared = (|| -> Result<_> {
        for (axis, v) in axes.iter().zip(values) {
            apply_axis_value(&mut doc, &axis.key, v)?;
        }
        let text = toml::to_string(&doc).map_err(|e| CliError::validation("<document>", e.to_string()))?;
        parse_config(&text)
    })();
    let cfg = match prepared {
        Ok(c) => c,
        Err(e) => return ("invalid".into(), e.exit_code(), Some(e.to_string())),
    };
    let run_opts = RunOptions {
        out: Some(dir.to_path_buf()),
        cadence: opts.cadence,
        base_dir: opts.config.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    match run_config(&cfg, &run_opts) {
        Ok(r) if r.diverged() => ("diverged".into(), exit::DIVERGENCE, None),
        Ok(_) => ("completed".into(), exit::SUCCESS, None),
        Err(e) => {
            let status = if e.exit_code() == exit::VALIDATION { "invalid" } else { "failed" };
            (status.into(), e.exit_code(), Some(e.to_string()))
        }
    }
}

pub fn sweep(opts: &SweepOptions) -> Result<SweepSummary> {
    if opts.axes.is_empty() {
        return Err(CliError::validation("--axis", "at least one axis is required"));
    }
    let text = std::fs::read_to_string(&opts.config).map_err(|e| CliError::io(&opts.config, e))?;
    let base: Table = toml::from_str(&text).map_err(|e| CliError::validation("<document>", e.message()))?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let manifest_path = opts.out.join(MANIFEST);
    let existing = read_manifest(&manifest_path)?;
    if !existing.is_empty() && !opts.resume {
        return Err(CliError::Data {
            path: manifest_path,
            detail: "manifest already has entries; pass --resume to continue the sweep".into(),
        });
    }

    let all = points(&opts.axes);
    let params_of = |values: &[Value]| -> Vec<(String, serde_json::Value)> {
        opts.axes
            .iter()
            .zip(values)
            .map(|(a, v)| (a.key.clone(), serde_json::to_value(v).expect("toml scalar")))
            .collect()
    };
    let mut done = BTreeSet::new();
    for e in &existing {
        let matches = all.get(e.index).is_some_and(|v| params_of(v) == e.params);
        if !matches {
            return Err(CliError::Data {
                path: manifest_path.clone(),
                detail: format!("entry {} does not match the requested axes", e.index),
            });
        }
        if e.is_final() {
            done.insert(e.index);
        }
    }
    let pending: Vec<usize> = (0..all.len()).filter(|i| !done.contains(i)).collect();
    let manifest = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&manifest_path)
        .map_err(|e| CliError::io(&manifest_path, e))?;
    let manifest = Mutex::new(manifest);
    let summary = Mutex::new(SweepSummary {
        points: all.len(),
        skipped: done.len(),
        ..Default::default()
    });
    let next = AtomicUsize::new(0);
    let write_error: Mutex<Option<CliError>> = Mutex::new(None);
    let workers = opts.workers.clamp(1, pending.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let slot = next.fetch_add(1, Ordering::SeqCst);
                let Some(&index) = pending.get(slot) else { break };
                let dir_name = format!("point_{index:03}");
                let dir = opts.out.join(&dir_name);
                let values = &all[index];
                log::info!("sweep point {index}: {dir_name}");
                let (status, exit_code, message) = run_point(&base, &opts.axes, values, &dir, opts);
                {
                    let mut s = summary.lock().expect("summary lock");
                    match status.as_str() {
                        "completed" => s.completed += 1,
                        "diverged" => s.diverged += 1,
                        "invalid" => s.invalid += 1,
                        _ => s.failed += 1,
                    }
                }
                let entry = ManifestEntry {
                    index,
                    dir: dir_name,
                    params: params_of(values),
                    status,
                    exit_code,
                    message,
                };
                let mut line = serde_json::to_string(&entry).expect("entry serializes");
                line.push('\n');
                let mut f = manifest.lock().expect("manifest lock");
                if let Err(e) = f.write_all(line.as_bytes()).and_then(|_| f.flush()) {
                    *write_error.lock().expect("error lock") = Some(CliError::io(&manifest_path, e));
                }
            });
        }
    });
    if let Some(e) = write_error.into_inner().expect("error lock") {
        return Err(e);
    }
    Ok(summary.into_inner().expect("summary lock"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_product_order() {
        let a = parse_axis("species[*].D=0.5,1").unwrap();
        assert_eq!(a.values, vec![Value::Float(0.5), Value::Integer(1)]);
        let b = parse_axis("n=32,64").unwrap();
        let p = points(&[a, b]);
        assert_eq!(p.len(), 4);
        assert_eq!(p[1], vec![Value::Float(0.5), Value::Integer(64)]);
        assert!(parse_axis("n").is_err());
        assert!(parse_axis("species[x].D=1").is_err());
    }

    #[test]
    fn values_are_applied_by_path() {
        let mut doc: Table = toml::from_str("n = 16\n[[species]]\nD = 0.5\n[[species]]\nD = 2.0\n").unwrap();
        apply_axis_value(&mut doc, "species[*].D", &Value::Integer(1)).unwrap();
        apply_axis_value(&mut doc, "stepper.dt", &Value::Float(0.1)).unwrap();
        let sp = doc["species"].as_array().unwrap();
        assert!(sp.iter().all(|s| s["D"] == Value::Float(1.0)));
        assert_eq!(doc["stepper"]["dt"], Value::Float(0.1));
        assert!(apply_axis_value(&mut doc, "species[5].D", &Value::Float(1.0)).is_err());
    }
}
