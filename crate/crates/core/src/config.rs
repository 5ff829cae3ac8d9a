//! Plain-text `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. One file may carry
//! both ingestion and solver keys; [`load`] splits them.

use std::path::Path;
use std::str::FromStr;

use crate::data::IngestConfig;
use crate::error::{Error, Result};
use crate::mi::{DualSolver, FeatureChoice, Method, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub(crate) fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected key=value, found '{trimmed}'"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                message: "empty key".into(),
            });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn parse_value<T: FromStr>(entry: &Entry) -> Result<T> {
    entry.value.parse().map_err(|_| Error::Config {
        line: entry.line,
        message: format!("invalid value '{}' for '{}'", entry.value, entry.key),
    })
}

fn name_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Applies ingestion keys; returns false if the key is not an ingestion key.
fn apply_ingest(cfg: &mut IngestConfig, entry: &Entry) -> Result<bool> {
    match entry.key.as_str() {
        "target" => cfg.target = Some(entry.value.clone()),
        "categorical" => cfg.categorical = name_list(&entry.value),
        "continuous" => cfg.continuous = name_list(&entry.value),
        "max_rows" => cfg.max_rows = Some(parse_value(entry)?),
        _ => return Ok(false),
    }
    Ok(true)
}

fn apply_solver(cfg: &mut SolverConfig, entry: &Entry) -> Result<bool> {
    match entry.key.as_str() {
        "quadrature_points" => cfg.quadrature_points = parse_value(entry)?,
        "max_iters" => cfg.max_iters = parse_value(entry)?,
        "grad_tol" => cfg.grad_tol = parse_value(entry)?,
        "min_entropy" => cfg.min_entropy = parse_value(entry)?,
        "max_blocks" => cfg.max_blocks = parse_value(entry)?,
        "quadrature_seed" => cfg.quadrature_seed = parse_value(entry)?,
        "method" => {
            cfg.method = Method::from_str(&entry.value).map_err(|message| Error::Config {
                line: entry.line,
                message,
            })?
        }
        "solver" => {
            cfg.solver = DualSolver::from_str(&entry.value).map_err(|message| Error::Config {
                line: entry.line,
                message,
            })?
        }
        "feature_map" => {
            cfg.feature_map =
                FeatureChoice::from_str(&entry.value).map_err(|message| Error::Config {
                    line: entry.line,
                    message,
                })?
        }
        _ => return Ok(false),
    }
    Ok(true)
}

impl IngestConfig {
    /// Parses a file holding only ingestion keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = IngestConfig::default();
        for entry in parse_entries(text)? {
            if !apply_ingest(&mut cfg, &entry)? {
                return Err(unknown_key(&entry));
            }
        }
        Ok(cfg)
    }
}

impl SolverConfig {
    /// Parses a file holding only solver keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        for entry in parse_entries(text)? {
            if !apply_solver(&mut cfg, &entry)? {
                return Err(unknown_key(&entry));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn unknown_key(entry: &Entry) -> Error {
    Error::Config {
        line: entry.line,
        message: format!("unknown key '{}'", entry.key),
    }
}

/// Parses a combined file into ingestion and solver settings.
pub fn parse(text: &str) -> Result<(IngestConfig, SolverConfig)> {
    let mut ingest = IngestConfig::default();
    let mut solver = SolverConfig::default();
    for entry in parse_entries(text)? {
        if !apply_ingest(&mut ingest, &entry)? && !apply_solver(&mut solver, &entry)? {
            return Err(unknown_key(&entry));
        }
    }
    solver.validate()?;
    Ok((ingest, solver))
}

pub fn load(path: &Path) -> Result<(IngestConfig, SolverConfig)> {
    parse(&std::fs::read_to_string(path)?)
}
