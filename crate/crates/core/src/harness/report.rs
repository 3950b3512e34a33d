use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, LoadedData};
use crate::error::Result;
use crate::runtime::TimingSummary;
use crate::samplers::{Method, PosteriorSample};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    /// `label_names[k]` is the input label mapped to class `k`.
    pub label_names: Vec<String>,
}

impl DatasetSummary {
    pub fn of(data: &LoadedData) -> Self {
        Self {
            rows: data.dataset.n_rows(),
            features: data.dataset.n_features(),
            classes: data.dataset.n_classes(),
            label_names: data.label_names.clone(),
        }
    }
}

/// Accuracy in percent across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub method: Method,
    pub folds: usize,
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub std: f64,
    pub per_fold: Vec<f64>,
}

impl AccuracySummary {
    pub fn from_folds(method: Method, per_fold: Vec<f64>) -> Self {
        let n = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / n;
        let var = if per_fold.len() > 1 {
            per_fold.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            method,
            folds: per_fold.len(),
            mean,
            std: var.sqrt(),
            per_fold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub method: Method,
    pub workers: usize,
    pub retained: usize,
    pub mean_depth: f64,
    pub mean_leaves: f64,
    pub proposals: usize,
    pub accepted: usize,
}

impl PosteriorSummary {
    pub fn of(method: Method, workers: usize, sample: &PosteriorSample) -> Self {
        Self {
            method,
            workers,
            retained: sample.len(),
            mean_depth: sample.mean_depth(),
            mean_leaves: sample.mean_leaves(),
            proposals: sample.stats.proposals,
            accepted: sample.stats.accepted,
        }
    }

    /// Sums counts and averages the means of per-fold summaries.
    pub fn combine(method: Method, workers: usize, parts: &[PosteriorSummary]) -> Self {
        let n = parts.len().max(1) as f64;
        Self {
            method,
            workers,
            retained: parts.iter().map(|p| p.retained).sum(),
            mean_depth: parts.iter().map(|p| p.mean_depth).sum::<f64>() / n,
            mean_leaves: parts.iter().map(|p| p.mean_leaves).sum::<f64>() / n,
            proposals: parts.iter().map(|p| p.proposals).sum(),
            accepted: parts.iter().map(|p| p.accepted).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: Method,
    pub workers: usize,
    pub min_seconds: f64,
    pub median_seconds: f64,
    pub mean_seconds: f64,
    pub repetitions: usize,
}

impl TimingRow {
    pub fn new(method: Method, workers: usize, t: TimingSummary) -> Self {
        Self {
            method,
            workers,
            min_seconds: t.min,
            median_seconds: t.median,
            mean_seconds: t.mean,
            repetitions: t.repetitions,
        }
    }
}

/// Everything that is a function of config and seed alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub format_version: u32,
    pub command: String,
    pub configs: Vec<ExperimentConfig>,
    pub dataset: DatasetSummary,
    pub accuracy: Vec<AccuracySummary>,
    pub posterior: Vec<PosteriorSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metrics: Metrics,
    /// Wall-clock measurements; excluded from [`Metrics`] because they vary run to run.
    pub timings: Vec<TimingRow>,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig, dataset: DatasetSummary) -> Self {
        Self {
            metrics: Metrics {
                format_version: REPORT_FORMAT_VERSION,
                command: command.to_string(),
                configs: vec![config.clone()],
                dataset,
                accuracy: Vec::new(),
                posterior: Vec::new(),
            },
            timings: Vec::new(),
        }
    }

    /// Appends another report's results (e.g. a second method on the same data).
    pub fn merge(&mut self, other: RunReport) {
        self.metrics.configs.extend(other.metrics.configs);
        self.metrics.accuracy.extend(other.metrics.accuracy);
        self.metrics.posterior.extend(other.metrics.posterior);
        self.timings.extend(other.timings);
    }

    pub fn metrics_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.metrics)?)
    }

    pub fn summary_text(&self) -> String {
        let m = &self.metrics;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}: {} rows, {} features, {} classes",
            m.command, m.dataset.rows, m.dataset.features, m.dataset.classes
        );
        if !m.accuracy.is_empty() {
            let _ = writeln!(s, "\n{:<8} {:>6} {:>16}", "method", "folds", "accuracy (%)");
            for a in &m.accuracy {
                let _ = writeln!(
                    s,
                    "{:<8} {:>6} {:>16}",
                    a.method.name(),
                    a.folds,
                    format!("{:.2}±{:.2}", a.mean, a.std)
                );
            }
        }
        if !m.posterior.is_empty() {
            let _ = writeln!(
                s,
                "\n{:<8} {:>7} {:>9} {:>10} {:>11}",
                "method", "workers", "retained", "mean depth", "mean leaves"
            );
            for p in &m.posterior {
                let _ = writeln!(
                    s,
                    "{:<8} {:>7} {:>9} {:>10.3} {:>11.3}",
                    p.method.name(),
                    p.workers,
                    p.retained,
                    p.mean_depth,
                    p.mean_leaves
                );
            }
        }
        if !self.timings.is_empty() {
            let _ = writeln!(
                s,
                "\n{:<8} {:>7} {:>12} {:>12} {:>5}",
                "method", "workers", "median (s)", "min (s)", "reps"
            );
            for t in &self.timings {
                let _ = writeln!(
                    s,
                    "{:<8} {:>7} {:>12.4} {:>12.4} {:>5}",
                    t.method.name(),
                    t.workers,
                    t.median_seconds,
                    t.min_seconds,
                    t.repetitions
                );
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Writes `report.json`, `timings.csv` (method, workers, median run seconds)
/// and `summary.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>) -> Result<ReportPaths> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        json: dir.join("report.json"),
        csv: dir.join("timings.csv"),
        summary: dir.join("summary.txt"),
    };
    fs::write(&paths.json, serde_json::to_string_pretty(report)? + "\n")?;

    let mut w = csv::Writer::from_path(&paths.csv)?;
    w.write_record(["method", "workers", "run_seconds"])?;
    for t in &report.timings {
        w.write_record([
            t.method.name().to_string(),
            t.workers.to_string(),
            t.median_seconds.to_string(),
        ])?;
    }
    w.flush()?;

    fs::write(&paths.summary, report.summary_text())?;
    Ok(paths)
}
