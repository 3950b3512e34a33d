use crate::data::Dataset;
use crate::model::leaf_probs;
use crate::samplers::PosteriorSample;

/// Posterior-mean class probabilities: the leaf distribution reached by `x`,
/// averaged uniformly over the retained trees.
pub fn predict(samples: &PosteriorSample, x: &[f64]) -> Vec<f64> {
    assert!(!samples.is_empty(), "cannot predict from an empty sample");
    let k = samples.trees[0].tree.n_classes();
    let mut acc = vec![0.0; k];
    for r in &samples.trees {
        for (a, p) in acc.iter_mut().zip(leaf_probs(&r.tree, x)) {
            *a += p;
        }
    }
    let total: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|a| *a /= total);
    acc
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Percentage of rows whose argmax prediction equals the label.
pub fn accuracy_percent(samples: &PosteriorSample, data: &Dataset) -> f64 {
    let correct = (0..data.n_rows())
        .filter(|&i| argmax(&predict(samples, data.row(i))) == data.label(i))
        .count();
    100.0 * correct as f64 / data.n_rows() as f64
}
