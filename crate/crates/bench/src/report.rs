//! Averages across horizons and the `report.json` / `report.txt` writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModelKind, ParamKind};
use crate::error::{BenchError, Result};
use crate::grid::{Failure, GridOutcome, RunRecord, Timing};

pub const REPORT_VERSION: &str = concat!("stockcast-bench ", env!("CARGO_PKG_VERSION"));

pub const SELECTION_NOTE: &str = "best parameter chosen by minimum test-set MAPE (ties: MAE, then smaller value); \
     no separate validation split, so reported errors are optimistically biased";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRecord {
    pub model: ModelKind,
    pub horizons: Vec<usize>,
    pub mape: f64,
    pub mae: f64,
    pub r2: f64,
}

/// Incremental mean; returns a constant input unchanged.
fn running_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut mean = 0.0;
    for (k, v) in values.enumerate() {
        mean += (v - mean) / (k + 1) as f64;
    }
    mean
}

/// Per-model means over horizons. Every model must cover the same horizon set.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<AverageRecord>> {
    let mut by_model: BTreeMap<ModelKind, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model).or_default().push(r);
    }
    let mut reference: Option<Vec<usize>> = None;
    let mut out = Vec::with_capacity(by_model.len());
    for (model, rows) in by_model {
        let mut horizons: Vec<usize> = rows.iter().map(|r| r.horizon).collect();
        horizons.sort_unstable();
        if horizons.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Config(format!("{model}: duplicate horizon in records")));
        }
        match &reference {
            None => reference = Some(horizons.clone()),
            Some(h) if *h != horizons => {
                return Err(BenchError::Config(format!(
                    "{model}: horizons {horizons:?} differ from {h:?}"
                )))
            }
            Some(_) => {}
        }
        out.push(AverageRecord {
            model,
            horizons,
            mape: running_mean(rows.iter().map(|r| r.mape)),
            mae: running_mean(rows.iter().map(|r| r.mae)),
            r2: running_mean(rows.iter().map(|r| r.r2)),
        });
    }
    Ok(out)
}

/// Averages for the models that have a record at every configured horizon.
pub fn summarize_complete(records: &[RunRecord], horizons: &[usize]) -> Result<Vec<AverageRecord>> {
    let complete: Vec<RunRecord> = records
        .iter()
        .filter(|r| {
            horizons
                .iter()
                .all(|h| records.iter().any(|o| o.model == r.model && o.horizon == *h))
                && horizons.contains(&r.horizon)
        })
        .cloned()
        .collect();
    summarize(&complete)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub selection: String,
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub averages: Vec<AverageRecord>,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn new(config: &ExperimentConfig, outcome: &GridOutcome) -> Result<Self> {
        Ok(Self {
            version: REPORT_VERSION.to_string(),
            selection: SELECTION_NOTE.to_string(),
            config: config.clone(),
            records: outcome.records.clone(),
            averages: summarize_complete(&outcome.records, &config.horizons)?,
            failures: outcome.failures.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|e| BenchError::Io(path, e))
}

/// Writes `report.json`, `report.txt` and `timings.json` into `dir`.
pub fn write_report(report: &Report, timings: &[Timing], dir: &Path) -> Result<()> {
    if report.records.is_empty() {
        return Err(BenchError::Config("no successful runs to report".into()));
    }
    fs::create_dir_all(dir).map_err(|e| BenchError::Io(dir.to_path_buf(), e))?;
    write_file(dir.join("report.json"), &report.to_json()?)?;
    write_file(dir.join("report.txt"), &render_text(report))?;
    let mut t = serde_json::to_string_pretty(timings)?;
    t.push('\n');
    write_file(dir.join("timings.json"), &t)
}

fn param_header(kind: ParamKind) -> &'static str {
    kind.as_str()
}

/// Aligned text tables: one per horizon, then the averages.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let mut horizons: Vec<usize> = report.records.iter().map(|r| r.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();
    for h in horizons {
        let days = if h == 1 { "Day" } else { "Days" };
        let _ = writeln!(out, "{h}-{days} ahead");
        let _ = writeln!(out, "{:<20}{:>10}{:>10}{:>12}{:>10}", "Prediction Models", "Parameter", "MAPE", "MAE", "R2");
        let mut last_kind = None;
        for r in report.records.iter().filter(|r| r.horizon == h) {
            if last_kind != Some(r.parameter) {
                let _ = writeln!(out, "{:<20}{:>10}", "", param_header(r.parameter));
                last_kind = Some(r.parameter);
            }
            let _ = writeln!(
                out,
                "{:<20}{:>10}{:>10.2}{:>12.2}{:>10.4}",
                r.model.label(),
                r.best_parameter,
                r.mape,
                r.mae,
                r.r2
            );
        }
        out.push('\n');
    }
    if !report.averages.is_empty() {
        let _ = writeln!(out, "Average performance");
        let _ = writeln!(out, "{:<20}{:>10}{:>12}{:>10}", "Prediction Models", "MAPE", "MAE", "R2");
        for a in &report.averages {
            let _ = writeln!(out, "{:<20}{:>10.2}{:>12.2}{:>10.4}", a.model.label(), a.mape, a.mae, a.r2);
        }
        out.push('\n');
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out, "Failed runs");
        for f in &report.failures {
            let _ = writeln!(out, "{} h={} {}={}: {}", f.model, f.horizon, f.model.param_kind().as_str(), f.parameter, f.message);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "Note: {}", report.selection);
    out
}
