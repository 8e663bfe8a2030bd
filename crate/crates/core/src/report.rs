//! Output files: `raw.csv`, `aggregate.csv`, `verdict.json`,
//! `run-manifest.json` and two-column `plot_*.csv` files.
//!
//! Floats are written with Rust's `Display`, the shortest decimal that
//! parses back to the same value. Missing values are empty cells.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::dependence::{CfTermSeries, DependenceProfile};
use crate::error::{Error, Result};
use crate::experiments::{CheckResult, ExperimentReport, Outcome};

pub const RAW: &str = "raw.csv";
pub const AGGREGATE: &str = "aggregate.csv";
pub const VERDICT: &str = "verdict.json";
pub const MANIFEST: &str = "run-manifest.json";

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A header and rows of pre-formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// A two-column `x,y` table.
    pub fn xy(x: &[f64], y: &[f64]) -> Self {
        let mut t = Self::new(&["x", "y"]);
        for (a, b) in x.iter().zip(y) {
            t.push(vec![fmt_f64(*a), fmt_f64(*b)]);
        }
        t
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

/// An output directory that refuses to overwrite files unless forced.
#[derive(Debug, Clone)]
pub struct OutputDir {
    path: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn create(path: &Path, force: bool) -> Result<Self> {
        fs::create_dir_all(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            force,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Fail before any work is done if one of `names` already exists.
    pub fn claim(&self, names: &[&str]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        match names.iter().find(|n| self.path.join(n).exists()) {
            Some(n) => Err(Error::config(
                "--out",
                format!("{} exists; pass --force to overwrite", self.path.join(n).display()),
            )),
            None => Ok(()),
        }
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        self.claim(&[name])?;
        let p = self.path.join(name);
        fs::write(&p, bytes)?;
        Ok(p)
    }

    pub fn write_csv(&self, name: &str, table: &Table) -> Result<PathBuf> {
        self.write_bytes(name, &table.to_csv()?)
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &str, config: Option<(&Path, &[u8])>, seed: u64, threads: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config_path: config.map(|(p, _)| p.display().to_string()),
            config_sha256: config.map(|(_, b)| sha256_hex(b)),
            seed,
            threads,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }
}

/// Overall verdict: fail if any check failed, else pass.
pub fn verdict_json(checks: &[CheckResult]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for c in checks {
        map.insert(
            c.name.clone(),
            json!({"outcome": c.outcome, "value": c.value, "detail": c.detail}),
        );
    }
    let failed = checks.iter().any(|c| c.outcome == Outcome::Fail);
    json!({"overall": if failed { Outcome::Fail } else { Outcome::Pass }, "checks": map})
}

pub fn rate_raw(report: &ExperimentReport) -> Table {
    let mut t = Table::new(&[
        "n_index",
        "rep",
        "n",
        "b",
        "delta",
        "rate_sqrt",
        "rate_stute",
        "rate_iota",
        "ratio_sqrt",
        "ratio_stute",
        "ratio_iota",
        "delta_circ",
        "delta_circ_error",
        "sup_gstar",
        "gstar_ratio",
        "bound_holds",
    ]);
    for r in &report.records {
        let o = &r.osc;
        t.push(vec![
            r.n_index.to_string(),
            r.rep.to_string(),
            o.n.to_string(),
            fmt_f64(o.b),
            fmt_f64(o.delta),
            fmt_f64(o.rate_sqrt),
            fmt_f64(o.rate_stute),
            fmt_f64(o.rate_iota),
            fmt_f64(o.ratio_sqrt),
            fmt_f64(o.ratio_stute),
            fmt_f64(o.ratio_iota),
            opt(r.delta_circ),
            opt(r.delta_circ_error),
            opt(r.sup_gstar),
            opt(r.gstar_ratio),
            r.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

pub fn rate_aggregate(report: &ExperimentReport) -> Table {
    let mut t = Table::new(&[
        "n",
        "b",
        "replicates",
        "median_delta",
        "median_ratio_sqrt",
        "iqr_ratio_sqrt",
        "median_ratio_stute",
        "iqr_ratio_stute",
        "median_ratio_iota",
        "iqr_ratio_iota",
        "median_gstar_ratio",
        "marginal_error",
    ]);
    for (a, e) in report.aggregates.iter().zip(&report.marginal_error) {
        t.push(vec![
            a.n.to_string(),
            fmt_f64(a.b),
            a.replicates.to_string(),
            fmt_f64(a.median_delta),
            fmt_f64(a.median_ratio_sqrt),
            fmt_f64(a.iqr_ratio_sqrt),
            fmt_f64(a.median_ratio_stute),
            fmt_f64(a.iqr_ratio_stute),
            fmt_f64(a.median_ratio_iota),
            fmt_f64(a.iqr_ratio_iota),
            opt(a.median_gstar_ratio),
            fmt_f64(*e),
        ]);
    }
    t
}

/// One `x,y` table per trend fit, plus the per-`n` median ratios.
pub fn rate_plots(report: &ExperimentReport) -> Vec<(String, Table)> {
    let mut out: Vec<(String, Table)> = report
        .trends
        .iter()
        .map(|t| (format!("plot_{}.csv", t.name), Table::xy(&t.x, &t.y)))
        .collect();
    let n: Vec<f64> = report.aggregates.iter().map(|a| a.n as f64).collect();
    let (name, y): (&str, Vec<f64>) = match report.kind {
        crate::experiments::ExperimentKind::Stute => {
            ("plot_median_ratio_stute.csv", report.aggregates.iter().map(|a| a.median_ratio_stute).collect())
        }
        _ => ("plot_median_ratio_sqrt.csv", report.aggregates.iter().map(|a| a.median_ratio_sqrt).collect()),
    };
    out.push((name.into(), Table::xy(&n, &y)));
    out
}

/// Per-lag dependence table: `lag, pdm, stderr, pdm_pow, partial_sum,
/// cf_term, cf_bound, cf_partial_sum`.
pub fn dependence_raw(p: &DependenceProfile, c: Option<&CfTermSeries>) -> Table {
    let mut t = Table::new(&[
        "lag",
        "pdm",
        "stderr",
        "pdm_pow",
        "partial_sum",
        "cf_term",
        "cf_bound",
        "cf_partial_sum",
    ]);
    for (i, &lag) in p.lags.iter().enumerate() {
        let cf = |f: fn(&CfTermSeries) -> &Vec<f64>| c.and_then(|c| f(c).get(i).copied());
        t.push(vec![
            lag.to_string(),
            fmt_f64(p.pdm[i]),
            fmt_f64(p.stderr[i]),
            fmt_f64(p.pdm_pow[i]),
            fmt_f64(p.partial_sums[i]),
            opt(cf(|c| &c.terms)),
            opt(cf(|c| &c.bounds)),
            opt(cf(|c| &c.partial_sums)),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1");
    }

    #[test]
    fn refuses_to_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(&dir.path().join("a/b"), false).unwrap();
        out.write_csv("t.csv", &Table::xy(&[1.0], &[2.0])).unwrap();
        assert_eq!(fs::read_to_string(out.path().join("t.csv")).unwrap(), "x,y\n1,2\n");
        assert!(matches!(out.claim(&["t.csv"]), Err(Error::Config { .. })));
        assert!(out.write_csv("t.csv", &Table::xy(&[], &[])).is_err());
        let forced = OutputDir::create(out.path(), true).unwrap();
        forced.write_csv("t.csv", &Table::xy(&[], &[])).unwrap();
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
