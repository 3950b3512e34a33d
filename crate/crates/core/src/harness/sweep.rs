use std::time::Instant;

use super::report::{DatasetSummary, PosteriorSummary, RunReport, TimingRow};
use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::runtime::TimingSummary;
use crate::samplers::{self, Method};

/// Sweep points that finish within this many seconds are repeated.
const REPEAT_BELOW_SECONDS: f64 = 60.0;
const REPETITIONS: usize = 3;

/// Largest sensible worker count: SMC needs at least one round, data
/// partitioning at least one row per shard.
pub fn clamp_workers(method: Method, requested: usize, rows: usize, iterations: usize) -> usize {
    let cap = match method {
        Method::Sumd => iterations,
        Method::Dp => rows,
        Method::Mcmc => usize::MAX,
    };
    let workers = requested.clamp(1, cap.max(1));
    if workers != requested {
        log::warn!("{method}: clamping {requested} workers to {workers}");
    }
    workers
}

/// Runs the configured method once per worker count on the full dataset and
/// records wall-clock time (three repetitions for points under a minute).
pub fn scaling_sweep(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    if config.workers_list.is_empty() {
        return Err(Error::InvalidConfig(
            "scaling sweep needs at least one worker count".into(),
        ));
    }
    let loaded = config.source.load()?;
    let data = &loaded.dataset;
    let mut report = RunReport::new("sweep", config, DatasetSummary::of(&loaded));

    for &requested in &config.workers_list {
        let workers = clamp_workers(config.method, requested, data.n_rows(), config.hyperparams.iterations);
        let hp = crate::params::Hyperparams {
            workers,
            ..config.hyperparams.clone()
        };
        let mut durations = Vec::with_capacity(REPETITIONS);
        let start = Instant::now();
        let sample = samplers::run(config.method, data, &hp)?;
        durations.push(start.elapsed());
        if durations[0].as_secs_f64() < REPEAT_BELOW_SECONDS {
            for _ in 1..REPETITIONS {
                let start = Instant::now();
                samplers::run(config.method, data, &hp)?;
                durations.push(start.elapsed());
            }
        }
        let summary = TimingSummary::from_samples(&durations);
        log::info!(
            "{} workers={workers}: median {:.4}s over {} run(s)",
            config.method,
            summary.median,
            summary.repetitions
        );
        report.timings.push(TimingRow::new(config.method, workers, summary));
        report
            .metrics
            .posterior
            .push(PosteriorSummary::of(config.method, workers, &sample));
    }
    Ok(report)
}
