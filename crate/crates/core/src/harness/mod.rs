//! Experiment plumbing around the samplers: data sources, cross-validation,
//! scaling sweeps, prediction and report files.

mod cv;
mod io;
mod model_file;
mod predict;
mod report;
mod sweep;
mod synthetic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, fold_assignment};
pub use io::{load_csv, read_feature_rows, LoadedData};
pub use model_file::{ModelFile, NodeRecord, TreeRecord, MODEL_FORMAT_VERSION};
pub use predict::{accuracy_percent, argmax, predict};
pub use report::{
    emit_report, AccuracySummary, DatasetSummary, Metrics, PosteriorSummary, ReportPaths, RunReport, TimingRow,
};
pub use sweep::{clamp_workers, scaling_sweep};
pub use synthetic::{generate_synthetic, Preset, SyntheticSpec};

use crate::error::{Error, Result};
use crate::params::Hyperparams;
use crate::samplers::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        /// Zero-based label column; `None` means the last column.
        label_column: Option<usize>,
        header: bool,
    },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<LoadedData> {
        match self {
            DataSource::Csv {
                path,
                label_column,
                header,
            } => load_csv(path, *label_column, *header),
            DataSource::Synthetic(spec) => {
                let dataset = generate_synthetic(spec)?;
                let label_names = (0..spec.classes).map(|k| k.to_string()).collect();
                Ok(LoadedData { dataset, label_names })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub source: DataSource,
    pub hyperparams: Hyperparams,
    pub folds: usize,
    /// Worker counts for scaling sweeps.
    pub workers_list: Vec<usize>,
    /// Output directory; not part of the config echo.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(method: Method, source: DataSource, hyperparams: Hyperparams) -> Self {
        Self {
            method,
            source,
            hyperparams,
            folds: 10,
            workers_list: Vec::new(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        if self.workers_list.contains(&0) {
            return Err(Error::InvalidConfig("worker counts must be positive".into()));
        }
        Ok(())
    }
}
