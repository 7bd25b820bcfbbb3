//! CSV data files and JSON sidecars.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// A table plus the checks asserted on it.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    pub results: serde_json::Map<String, Value>,
    /// Extra tables written as `<subcommand>_<name>.csv`.
    pub extra: Vec<(String, Vec<String>, Vec<Vec<String>>)>,
}

impl Report {
    pub fn new(header: &[&str]) -> Self {
        Report { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    pub fn assert(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.check(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let n = |s| self.checks.iter().filter(|c| c.status == s).count();
        (n(Status::Pass), n(Status::Fail), n(Status::Inconclusive))
    }

    pub fn status(&self) -> Status {
        let (_, fail, inc) = self.counts();
        if fail > 0 {
            Status::Fail
        } else if inc > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

/// Shortest round-trip formatting (exponent form for extreme magnitudes).
pub fn f(x: f64) -> String {
    format!("{x:?}")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub struct Meta<'a> {
    pub subcommand: &'a str,
    pub config: &'a ExperimentConfig,
    pub config_path: Option<&'a Path>,
    pub seed: u64,
    pub wall_time: f64,
}

/// Writes `<out>/<subcommand>.csv` (plus extra tables) and the JSON sidecar.
pub fn write(out: &Path, report: &Report, meta: &Meta) -> Result<PathBuf, String> {
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let csv_path = out.join(format!("{}.csv", meta.subcommand));
    write_csv(&csv_path, &report.header, &report.rows)?;
    let mut files = vec![csv_path.file_name().unwrap().to_string_lossy().to_string()];
    for (name, header, rows) in &report.extra {
        let p = out.join(format!("{}_{name}.csv", meta.subcommand));
        write_csv(&p, header, rows)?;
        files.push(p.file_name().unwrap().to_string_lossy().to_string());
    }
    let (pass, fail, inconclusive) = report.counts();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = json!({
        "subcommand": meta.subcommand,
        "status": report.status(),
        "counts": { "pass": pass, "fail": fail, "inconclusive": inconclusive },
        "checks": report.checks,
        "results": report.results,
        "files": files,
        "config": meta.config,
        "config_path": meta.config_path.map(|p| p.display().to_string()),
        "seed": meta.seed,
        "versions": { "levy-spde": env!("CARGO_PKG_VERSION") },
        "wall_time_s": meta.wall_time,
        "timestamp": timestamp,
    });
    let json_path = out.join(format!("{}.json", meta.subcommand));
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| e.to_string())?;
    std::fs::write(&json_path, text).map_err(|e| format!("cannot write {}: {e}", json_path.display()))?;
    Ok(csv_path)
}
