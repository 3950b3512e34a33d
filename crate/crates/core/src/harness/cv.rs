use rand::seq::SliceRandom;
use rand::Rng;

use super::report::{AccuracySummary, DatasetSummary, PosteriorSummary, RunReport};
use super::{accuracy_percent, ExperimentConfig, LoadedData};
use crate::error::{Error, Result};
use crate::params::Hyperparams;
use crate::runtime::{stream, Purpose};
use crate::samplers;

/// Fold index for every row: a seeded shuffle dealt round-robin into
/// `folds` groups whose sizes differ by at most one.
pub fn fold_assignment(n_rows: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if n_rows < folds {
        return Err(Error::InvalidConfig(format!(
            "{n_rows} rows cannot be split into {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut stream(seed, Purpose::Folds, 0, 0));
    let mut fold = vec![0; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % folds;
    }
    Ok(fold)
}

fn fold_hyperparams(hp: &Hyperparams, fold: usize) -> Hyperparams {
    Hyperparams {
        seed: stream(hp.seed, Purpose::Folds, fold as u64 + 1, 0).gen(),
        ..hp.clone()
    }
}

/// k-fold cross-validation of the configured method.
pub fn cross_validate(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let loaded = config.source.load()?;
    cross_validate_loaded(config, &loaded)
}

pub(crate) fn cross_validate_loaded(config: &ExperimentConfig, loaded: &LoadedData) -> Result<RunReport> {
    let data = &loaded.dataset;
    let hp = &config.hyperparams;
    let assignment = fold_assignment(data.n_rows(), config.folds, hp.seed)?;

    let mut per_fold = Vec::with_capacity(config.folds);
    let mut summaries = Vec::with_capacity(config.folds);
    for fold in 0..config.folds {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..data.n_rows()).partition(|&i| assignment[i] == fold);
        let train = data.subset(&train)?;
        let test = data.subset(&test)?;
        let fold_hp = fold_hyperparams(hp, fold);
        let sample = samplers::run(config.method, &train, &fold_hp)?;
        per_fold.push(accuracy_percent(&sample, &test));
        summaries.push(PosteriorSummary::of(config.method, hp.workers, &sample));
        log::info!(
            "{} fold {}/{}: accuracy {:.2}%",
            config.method,
            fold + 1,
            config.folds,
            per_fold[fold]
        );
    }

    let mut report = RunReport::new("cv", config, DatasetSummary::of(loaded));
    report
        .metrics
        .accuracy
        .push(AccuracySummary::from_folds(config.method, per_fold));
    report
        .metrics
        .posterior
        .push(PosteriorSummary::combine(config.method, hp.workers, &summaries));
    Ok(report)
}
