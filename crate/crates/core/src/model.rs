//! The probabilistic model: per-row likelihood under the leaf class
//! distributions, a uniform prior over split features and thresholds, and a
//! depth-penalized tree prior `a / (1 + depth)^beta`. Everything is in log
//! space; a product over a million rows underflows otherwise.
//!
//! Leaf distributions are not sampled. After every structural change they
//! are refitted to smoothed empirical class frequencies, which makes the
//! split parameters the only random quantities.

use std::ops::Range;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::Hyperparams;
use crate::runtime::WorkerPool;
use crate::tree::{Node, Tree};

/// Per-slot class counts: `counts[slot * k + class]`.
fn leaf_counts(tree: &Tree, data: &Dataset, rows: Range<usize>) -> Vec<u64> {
    let k = data.n_classes();
    let mut counts = vec![0u64; tree.arena_len() * k];
    for i in rows {
        let leaf = tree.descend(data.row(i));
        counts[leaf * k + data.label(i)] += 1;
    }
    counts
}

fn apply_counts(tree: &mut Tree, counts: &[u64], k: usize, smoothing: f64) {
    for leaf in tree.leaves() {
        let c = &counts[leaf * k..(leaf + 1) * k];
        let n: u64 = c.iter().sum();
        let probs = if n == 0 {
            vec![1.0 / k as f64; k]
        } else {
            let denom = n as f64 + k as f64 * smoothing;
            let raw: Vec<f64> = c.iter().map(|&ck| (ck as f64 + smoothing) / denom).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        };
        tree.set_probs(leaf, probs);
    }
}

/// Sets each leaf to `(count_k + s) / (n + K s)` over the training rows it
/// receives; empty leaves get the uniform distribution.
pub fn fit_leaves(tree: &Tree, data: &Dataset, smoothing: f64) -> Tree {
    let mut out = tree.clone();
    refit_leaves(&mut out, data, smoothing);
    out
}

/// In-place [`fit_leaves`].
pub fn refit_leaves(tree: &mut Tree, data: &Dataset, smoothing: f64) {
    let counts = leaf_counts(tree, data, 0..data.n_rows());
    apply_counts(tree, &counts, data.n_classes(), smoothing);
}

/// `ln probs` per arena slot, flattened like the counts.
fn log_prob_table(tree: &Tree) -> Vec<f64> {
    let k = tree.n_classes();
    let mut table = vec![f64::NAN; tree.arena_len() * k];
    for leaf in tree.leaves() {
        for (slot, p) in table[leaf * k..(leaf + 1) * k].iter_mut().zip(tree.probs(leaf)) {
            *slot = p.ln();
        }
    }
    table
}

fn sum_log_probs(tree: &Tree, table: &[f64], data: &Dataset, rows: Range<usize>) -> f64 {
    let k = data.n_classes();
    let mut acc = 0.0;
    for i in rows {
        acc += table[tree.descend(data.row(i)) * k + data.label(i)];
    }
    acc
}

/// `sum_i ln p(y_i | x_i, T)`, accumulated in row order.
pub fn log_likelihood(tree: &Tree, data: &Dataset) -> f64 {
    debug_assert_eq!(tree.n_classes(), data.n_classes());
    let table = log_prob_table(tree);
    sum_log_probs(tree, &table, data, 0..data.n_rows())
}

/// Sum over internal nodes of `ln(1/F) + ln(1/|candidates(feature)|)`.
/// A threshold off the candidate grid has zero prior mass.
pub fn log_param_prior(tree: &Tree, data: &Dataset) -> f64 {
    let log_f = (data.n_features() as f64).ln();
    let mut total = 0.0;
    for id in tree.internals() {
        let (feature, threshold) = tree.split_of(id).unwrap();
        if !data.is_candidate(feature, threshold) {
            return f64::NEG_INFINITY;
        }
        total -= log_f + (data.thresholds(feature).len() as f64).ln();
    }
    total
}

/// `ln a - beta ln(1 + depth)`.
pub fn log_tree_prior(tree: &Tree, hp: &Hyperparams) -> f64 {
    depth_log_prior(tree.depth(), hp.a, hp.beta)
}

pub(crate) fn depth_log_prior(depth: usize, a: f64, beta: f64) -> f64 {
    a.ln() - beta * (1.0 + depth as f64).ln()
}

/// Unnormalized log posterior of a fitted tree.
pub fn log_joint(tree: &Tree, data: &Dataset, hp: &Hyperparams) -> f64 {
    let prior = log_param_prior(tree, data) + log_tree_prior(tree, hp);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    log_likelihood(tree, data) + prior
}

/// Contiguous, near-equal row shards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    shards: Vec<Range<usize>>,
}

impl Partition {
    /// Splits `0..n_rows` into `shards` ranges whose sizes differ by at most
    /// one; the first `n_rows % shards` ranges get the extra row.
    pub fn even(n_rows: usize, shards: usize) -> Result<Self> {
        if shards == 0 || shards > n_rows {
            return Err(Error::InvalidConfig(format!(
                "cannot split {n_rows} rows into {shards} shards"
            )));
        }
        let base = n_rows / shards;
        let extra = n_rows % shards;
        let mut start = 0;
        let shards = (0..shards)
            .map(|s| {
                let len = base + usize::from(s < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect();
        Ok(Self { shards })
    }

    pub fn shards(&self) -> &[Range<usize>] {
        &self.shards
    }

    pub fn len(&self) -> usize {
        self.shards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shards.is_empty()
    }

    pub fn covers(&self, n_rows: usize) -> bool {
        let mut next = 0;
        for r in &self.shards {
            if r.start != next {
                return false;
            }
            next = r.end;
        }
        next == n_rows
    }
}

/// Likelihood computed shard by shard on the pool; partial sums are folded
/// in shard order so a given partition always yields the same bits.
pub fn partitioned_log_likelihood(tree: &Tree, data: &Dataset, part: &Partition, pool: &WorkerPool) -> Result<f64> {
    debug_assert!(part.covers(data.n_rows()));
    let table = log_prob_table(tree);
    let partials = pool.map_ordered(part.shards(), |_, rows| {
        Ok::<_, Error>(sum_log_probs(tree, &table, data, rows.clone()))
    })?;
    Ok(partials.into_iter().reduce(|acc, x| acc + x).unwrap_or(0.0))
}

/// Leaf fitting with per-shard class counts. Counts are integers, so the
/// result is identical to [`refit_leaves`] for any partition.
pub fn partitioned_refit_leaves(
    tree: &mut Tree,
    data: &Dataset,
    part: &Partition,
    pool: &WorkerPool,
    smoothing: f64,
) -> Result<()> {
    let shard_counts = {
        let t: &Tree = tree;
        pool.map_ordered(part.shards(), |_, rows| {
            Ok::<_, Error>(leaf_counts(t, data, rows.clone()))
        })?
    };
    let mut counts = vec![0u64; tree.arena_len() * data.n_classes()];
    for sc in shard_counts {
        for (a, b) in counts.iter_mut().zip(sc) {
            *a += b;
        }
    }
    apply_counts(tree, &counts, data.n_classes(), smoothing);
    Ok(())
}

/// Leaf-probability lookup without refitting, for prediction.
pub fn leaf_probs<'t>(tree: &'t Tree, x: &[f64]) -> &'t [f64] {
    match tree.node(tree.descend(x)) {
        Node::Leaf { probs } => probs,
        Node::Internal { .. } => unreachable!("descend always stops at a leaf"),
    }
}
