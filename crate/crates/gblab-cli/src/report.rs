//! Run summaries and the files written for them.

use crate::config::ExperimentConfig;
use crate::svg::{self, CdfTable, Style};
use gblab::birkhoff::Histogram;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One Kolmogorov distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    #[serde(rename = "Q")]
    pub q: u64,
    /// Sample size behind the distance.
    pub n: usize,
    pub law: String,
    pub ks: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub statistics: Map<String, Value>,
    pub ks: Vec<KsEntry>,
    pub runtime_seconds: f64,
    pub thresholds: BTreeMap<String, f64>,
    pub pass: bool,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Report {
        Report {
            experiment: cfg.experiment.name().to_string(),
            config: cfg.to_pairs(),
            statistics: Map::new(),
            ks: Vec::new(),
            runtime_seconds: 0.0,
            thresholds: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn stat(&mut self, key: &str, v: impl Into<Value>) {
        self.statistics.insert(key.to_string(), v.into());
    }

    pub fn threshold(&mut self, key: &str, v: f64) {
        self.thresholds.insert(key.to_string(), v);
    }

    /// Record a named check; the run passes only if every check does.
    pub fn check(&mut self, key: &str, ok: bool) {
        let checks = self
            .statistics
            .entry("checks")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(m) = checks {
            m.insert(key.to_string(), Value::Bool(ok));
        }
        self.pass &= ok;
    }

    pub fn f64_stat(&self, key: &str) -> Option<f64> {
        self.statistics.get(key).and_then(Value::as_f64)
    }

    pub fn ks_csv(&self) -> String {
        let mut s = String::from("Q,n,law,ks\n");
        for e in &self.ks {
            let _ = writeln!(s, "{},{},\"{}\",{}", e.q, e.n, e.law.replace('"', "'"), e.ks);
        }
        s
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub histogram: Option<Histogram>,
    pub cdf: Option<CdfTable>,
    /// Extra CSV tables as `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(report: Report) -> Self {
        Outcome { report, histogram: None, cdf: None, tables: Vec::new() }
    }
}

/// Write all files of `outcome` into `dir`; returns the paths written.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, contents: &str| -> std::io::Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, contents)?;
        written.push(p);
        Ok(())
    };
    let json = serde_json::to_string_pretty(&outcome.report).map_err(std::io::Error::other)?;
    put("summary.json", &(json + "\n"))?;
    put("config.txt", &cfg.to_text())?;
    if !outcome.report.ks.is_empty() {
        put("ks.csv", &outcome.report.ks_csv())?;
    }
    if let Some(h) = &outcome.histogram {
        put("histogram.csv", &h.to_csv())?;
    }
    if let Some(c) = &outcome.cdf {
        let csv = c.to_csv();
        let title = format!("{}: empirical vs reference CDF", cfg.experiment);
        match svg::render(&csv, &Style::cdf(&title)) {
            Ok(s) => {
                put("cdf.csv", &csv)?;
                put("cdf.svg", &s)?;
            }
            Err(_) => put("cdf.csv", &csv)?,
        }
    }
    for (name, contents) in &outcome.tables {
        put(name, contents)?;
    }
    Ok(written)
}
