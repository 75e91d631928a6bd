//! Pattern CSV and metrics JSON files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idealface::metrics::{BeampatternReport, EigenSummary, NullDepth, PatternMetrics, SolverSummary};

#[derive(Debug, Serialize, Deserialize)]
struct PatternRow {
    angle_deg: f64,
    value_db: f64,
}

pub fn write_pattern(path: &Path, angles: &[f64], db: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (&angle_deg, &value_db) in angles.iter().zip(db) {
        w.serialize(PatternRow { angle_deg, value_db })?;
    }
    w.flush()?;
    Ok(())
}

/// `(angles, dB values)` from a pattern file.
pub fn read_pattern(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut angles = Vec::new();
    let mut db = Vec::new();
    for row in r.deserialize() {
        let row: PatternRow = row?;
        angles.push(row.angle_deg);
        db.push(row.value_db);
    }
    Ok((angles, db))
}

/// Everything in a report except the sampled pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub experiment: String,
    pub method: String,
    pub metrics: PatternMetrics,
    pub nulls: Vec<NullDepth>,
    pub per_antenna_powers: Vec<f64>,
    pub x_eigen: EigenSummary,
    pub w_columns: Option<usize>,
    pub w_min_singular_value: Option<f64>,
    pub solver: SolverSummary,
}

impl MetricsFile {
    pub fn from_report(experiment: &str, r: &BeampatternReport) -> Self {
        Self {
            experiment: experiment.to_string(),
            method: r.method.clone(),
            metrics: r.metrics.clone(),
            nulls: r.nulls.clone(),
            per_antenna_powers: r.per_antenna_powers.clone(),
            x_eigen: r.x_eigen.clone(),
            w_columns: r.w_columns,
            w_min_singular_value: r.w_min_singular_value,
            solver: r.solver.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn pattern_path(dir: &Path, id: &str, method: &str) -> PathBuf {
    dir.join(format!("{id}_{method}_pattern.csv"))
}

pub fn metrics_path(dir: &Path, id: &str, method: &str) -> PathBuf {
    dir.join(format!("{id}_{method}_metrics.json"))
}

/// Write the pattern and metrics files of one report; returns both paths.
pub fn write_report(dir: &Path, id: &str, report: &BeampatternReport) -> Result<[PathBuf; 2]> {
    let p = pattern_path(dir, id, &report.method);
    let m = metrics_path(dir, id, &report.method);
    if report.angles_deg.len() != report.pattern_db.len() {
        bail!("report {} has mismatched pattern length", report.method);
    }
    write_pattern(&p, &report.angles_deg, &report.pattern_db)?;
    write_json(&m, &MetricsFile::from_report(id, report))?;
    Ok([p, m])
}
