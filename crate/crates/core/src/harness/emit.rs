//! CSV tables, JSON manifests and output directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    /// Floats use the shortest representation that parses back exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Numerical(format!("csv encoding failed: {e}"));
        w.write_record(&self.headers).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Read a CSV file back as header plus string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let headers = r.headers().map_err(|e| Error::format(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| Error::format(path, e))?.iter().map(String::from).collect());
    }
    Ok((headers, rows))
}

/// Version string: `git describe` of the working tree when available,
/// otherwise the crate version.
pub fn version() -> String {
    let pkg = env!("CARGO_PKG_VERSION");
    let git = std::process::Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match git {
        Some(g) => format!("{pkg}+{g}"),
        None => pkg.to_string(),
    }
}

/// Modelling and numerical choices in effect for every study.
pub fn design_flags() -> BTreeMap<String, String> {
    [
        ("rotation_convention", "R_sigma(theta) = exp(-i theta sigma), full angle"),
        ("qubit_order", "qubit 0 is the most significant bit"),
        ("rng", "ChaCha8 seeded via seed_from_u64; SplitMix64 stream splitting"),
        ("ansatz", "per layer RZ-RX-RZ on each qubit, then CRY ring control j -> target j+1 mod n"),
        ("initial_parameters", "uniform on [0, 2pi)"),
        ("optimizer", "BFGS, identity initial inverse Hessian, strong Wolfe c1=1e-4 c2=0.9, cubic zoom"),
        ("termination", "gradient infinity norm below grad_tol, or max_iters"),
        ("curvature_failure", "skip the BFGS update when y.s <= 1e-10"),
        ("gradient", "central differences, step 1e-6"),
        ("unitary_evolution_in_optimization", "exact, Q = exp(-iHt)"),
        ("trotter_sign", "product formula targets exp(+iHt); run at -t for exp(-iHt)"),
        ("sampled_variance", "one circuit per Pauli term of H and of H^2, no grouping"),
        ("sampled_unitary", "P(all zeros) after V, evolution, V^dagger; no ancilla"),
        ("schwinger_boundary", "open; hopping over j = 1..n-1"),
        ("fermion_boundary", "periodic hopping and interactions"),
        ("fermion_number_operator", "n_j = (I - Z_j)/2"),
        ("random_ensemble", "GUE: complex Gaussian entries of variance 1, (A + A^dagger)/2, times scale"),
        ("degeneracy_tolerance", "1e-9 relative to max(1, max |lambda|)"),
        ("closest_eigenstate", "eigen-subspace with the largest summed squared overlap"),
        ("overlap_gain", "gain with F_opt = 1; F_init is the initial overlap with the final closest subspace"),
        ("cost_gain", "gain with F_opt = 0"),
        ("variance_error_normalization", "divided by the number of variance-estimator circuits"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub study: String,
    pub version: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub wall_time_seconds: f64,
    pub design: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

/// Output directory for one study invocation.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    started: Instant,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir { root, started: Instant::now(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        let text = table.to_csv()?;
        self.write_text(name, &text)
    }

    /// Write `manifest.json` listing everything written so far.
    pub fn write_manifest<C: Serialize>(
        &mut self,
        study: &str,
        config: &C,
        master_seed: u64,
        seeds: Vec<u64>,
        summary: serde_json::Value,
    ) -> Result<PathBuf> {
        let manifest = Manifest {
            study: study.to_string(),
            version: version(),
            config: serde_json::to_value(config).map_err(|e| Error::Numerical(format!("config encoding: {e}")))?,
            master_seed,
            seeds,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            design: design_flags(),
            outputs: self.written.clone(),
            summary,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numerical(format!("manifest encoding: {e}")))?;
        self.write_text("manifest.json", &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(&["name", "value", "missing", "flag"]);
        let values = [0.1 + 0.2, 1e-300, -std::f64::consts::PI, 123_456_789.123_456_79, 5e-324];
        for (k, v) in values.iter().enumerate() {
            t.push(vec![Cell::Text(format!("row, \"{k}\"")), Cell::Float(*v), Cell::Empty, Cell::Bool(k % 2 == 0)]);
        }
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let path = out.write_table("t.csv", &t).unwrap();
        let (headers, rows) = read_csv(&path).unwrap();
        assert_eq!(headers, t.headers);
        for (row, v) in rows.iter().zip(values) {
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), v.to_bits());
            assert_eq!(row[2], "");
        }
        assert!(rows[0][0].contains(','));
    }

    #[test]
    fn manifest_echoes_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("nested")).unwrap();
        let cfg = crate::harness::config::ExperimentConfig::default();
        let path = out.write_manifest("demo", &cfg, 3, vec![1, 2], serde_json::json!({})).unwrap();
        let m: Manifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        let back: crate::harness::config::ExperimentConfig = serde_json::from_value(m.config).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(m.seeds, vec![1, 2]);
        assert!(m.design.contains_key("random_ensemble"));
    }

    #[test]
    fn io_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        match OutputDir::create(file.join("sub")) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("sub")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
