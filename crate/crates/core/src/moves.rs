//! Proposal kernel over trees: Grow, Prune, Change and Swap.
//!
//! A proposal first picks a kind uniformly among the kinds valid for the
//! current tree, then an outcome uniformly within that kind. Both forward
//! and reverse log-probabilities are exact, which the Metropolis-Hastings
//! ratio and the SMC weights depend on.
//!
//! * Grow splits a leaf; the feature is uniform over features that have a
//!   candidate threshold, the threshold uniform over that feature's grid.
//! * Prune collapses an internal node whose children are both leaves, the
//!   exact inverse of Grow.
//! * Change redraws the split of one internal node (possibly to the same value).
//! * Swap exchanges the splits of an unordered pair of internal nodes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::MoveConfig;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Grow,
    Prune,
    Change,
    Swap,
}

impl MoveKind {
    pub const ALL: [MoveKind; 4] = [MoveKind::Grow, MoveKind::Prune, MoveKind::Change, MoveKind::Swap];
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub kind: MoveKind,
    /// Proposed tree. New leaves carry uniform probabilities until refitted.
    pub new_tree: Tree,
    /// `ln q(new | old)`.
    pub log_q_fwd: f64,
    /// `ln q(old | new)`; `-inf` when the configured kernel cannot undo the move.
    pub log_q_rev: f64,
}

/// Leaves that Grow may split, in preorder.
fn growable_leaves(tree: &Tree, cfg: &MoveConfig) -> Vec<NodeId> {
    tree.preorder()
        .into_iter()
        .filter(|&(id, depth)| tree.node(id).is_leaf() && cfg.max_depth.is_none_or(|m| depth < m))
        .map(|(id, _)| id)
        .collect()
}

/// Move kinds that can act on `tree`, in the order Grow, Prune, Change, Swap.
pub fn valid_moves(tree: &Tree, data: &Dataset, cfg: &MoveConfig) -> Vec<MoveKind> {
    let can_split = !data.splittable_features().is_empty();
    let stats = tree.stats();
    MoveKind::ALL
        .into_iter()
        .filter(|&kind| cfg.enabled(kind))
        .filter(|&kind| match kind {
            MoveKind::Grow => can_split && !growable_leaves(tree, cfg).is_empty(),
            MoveKind::Prune => stats.prunable >= 1,
            MoveKind::Change => can_split && stats.internals >= 1,
            MoveKind::Swap => stats.internals >= 2,
        })
        .collect()
}

/// `ln P(draw exactly this split)` when a split is drawn for Grow or Change.
fn log_split_prob(data: &Dataset, feature: usize, threshold: f64) -> f64 {
    if !data.is_candidate(feature, threshold) {
        return f64::NEG_INFINITY;
    }
    let usable = data.splittable_features().len() as f64;
    -usable.ln() - (data.thresholds(feature).len() as f64).ln()
}

fn draw_split<R: Rng + ?Sized>(data: &Dataset, rng: &mut R) -> (usize, f64) {
    let features = data.splittable_features();
    let feature = features[rng.gen_range(0..features.len())];
    let grid = data.thresholds(feature);
    (feature, grid[rng.gen_range(0..grid.len())])
}

fn ln_count(n: usize) -> f64 {
    (n as f64).ln()
}

/// Log-probability that the next proposal from `tree` leaves it unchanged:
/// a Change that redraws the current split, or a Swap of two equal splits.
fn log_self_transition(tree: &Tree, data: &Dataset, cfg: &MoveConfig) -> f64 {
    let valid = valid_moves(tree, data, cfg);
    let log_kind = -ln_count(valid.len());
    let internals = tree.internals();
    let m = internals.len();
    let mut total = 0.0;
    if valid.contains(&MoveKind::Change) {
        for &id in &internals {
            let (f, t) = tree.split_of(id).unwrap();
            total += (log_kind - ln_count(m) + log_split_prob(data, f, t)).exp();
        }
    }
    if valid.contains(&MoveKind::Swap) {
        let mut equal_pairs = 0usize;
        for (i, &a) in internals.iter().enumerate() {
            for &b in &internals[i + 1..] {
                if tree.split_of(a) == tree.split_of(b) {
                    equal_pairs += 1;
                }
            }
        }
        let pairs = m * (m - 1) / 2;
        total += (log_kind).exp() * equal_pairs as f64 / pairs as f64;
    }
    total.ln()
}

/// Draws one move from the kernel.
pub fn propose<R: Rng + ?Sized>(tree: &Tree, data: &Dataset, cfg: &MoveConfig, rng: &mut R) -> Result<Proposal> {
    if data.splittable_features().is_empty() {
        return Err(Error::DegenerateDataset);
    }
    let valid = valid_moves(tree, data, cfg);
    if valid.is_empty() {
        return Err(Error::InvalidConfig(
            "no enabled move kind applies to the current tree".into(),
        ));
    }
    let kind = valid[rng.gen_range(0..valid.len())];
    let log_kind_fwd = -ln_count(valid.len());
    let mut new_tree = tree.clone();

    let (log_q_fwd, log_q_rev) = match kind {
        MoveKind::Grow => {
            let leaves = growable_leaves(tree, cfg);
            let leaf = leaves[rng.gen_range(0..leaves.len())];
            let (feature, threshold) = draw_split(data, rng);
            new_tree.split(leaf, feature, threshold);
            let fwd = log_kind_fwd - ln_count(leaves.len()) + log_split_prob(data, feature, threshold);
            let rev_valid = valid_moves(&new_tree, data, cfg);
            let rev = if rev_valid.contains(&MoveKind::Prune) {
                -ln_count(rev_valid.len()) - ln_count(new_tree.stats().prunable)
            } else {
                f64::NEG_INFINITY
            };
            (fwd, rev)
        }
        MoveKind::Prune => {
            let prunable = tree.prunable();
            let node = prunable[rng.gen_range(0..prunable.len())];
            let (feature, threshold) = tree.split_of(node).unwrap();
            new_tree.collapse(node);
            let fwd = log_kind_fwd - ln_count(prunable.len());
            let rev_valid = valid_moves(&new_tree, data, cfg);
            let regrowable = growable_leaves(&new_tree, cfg);
            let rev = if rev_valid.contains(&MoveKind::Grow) && regrowable.contains(&node) {
                -ln_count(rev_valid.len()) - ln_count(regrowable.len()) + log_split_prob(data, feature, threshold)
            } else {
                f64::NEG_INFINITY
            };
            (fwd, rev)
        }
        MoveKind::Change => {
            let internals = tree.internals();
            let node = internals[rng.gen_range(0..internals.len())];
            let (old_f, old_t) = tree.split_of(node).unwrap();
            let (feature, threshold) = draw_split(data, rng);
            new_tree.set_split(node, feature, threshold);
            if (feature, threshold.to_bits()) == (old_f, old_t.to_bits()) {
                let s = log_self_transition(tree, data, cfg);
                (s, s)
            } else {
                let m = ln_count(internals.len());
                // Structure is unchanged, so the valid set is too.
                let fwd = log_kind_fwd - m + log_split_prob(data, feature, threshold);
                let rev = log_kind_fwd - m + log_split_prob(data, old_f, old_t);
                (fwd, rev)
            }
        }
        MoveKind::Swap => {
            let internals = tree.internals();
            let m = internals.len();
            let i = rng.gen_range(0..m);
            let mut j = rng.gen_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (internals[i], internals[j]);
            let sa = tree.split_of(a).unwrap();
            let sb = tree.split_of(b).unwrap();
            new_tree.set_split(a, sb.0, sb.1);
            new_tree.set_split(b, sa.0, sa.1);
            if (sa.0, sa.1.to_bits()) == (sb.0, sb.1.to_bits()) {
                let s = log_self_transition(tree, data, cfg);
                (s, s)
            } else {
                let q = log_kind_fwd + (2.0f64).ln() - ln_count(m) - ln_count(m - 1);
                (q, q)
            }
        }
    };

    Ok(Proposal {
        kind,
        new_tree,
        log_q_fwd,
        log_q_rev,
    })
}

/// Every outcome of one proposal from `tree` with its probability, built by
/// walking each move's choice hierarchy. Outcomes are not merged: a tree
/// reachable in several ways appears several times.
pub fn enumerate_transitions(tree: &Tree, data: &Dataset, cfg: &MoveConfig) -> Vec<(MoveKind, Tree, f64)> {
    let mut per_kind: Vec<(MoveKind, Vec<(Tree, f64)>)> = Vec::new();
    let features: Vec<usize> = (0..data.n_features())
        .filter(|&f| !data.thresholds(f).is_empty())
        .collect();

    for kind in MoveKind::ALL {
        if !cfg.enabled(kind) {
            continue;
        }
        let mut outcomes = Vec::new();
        match kind {
            MoveKind::Grow => {
                let leaves: Vec<NodeId> = tree
                    .preorder()
                    .into_iter()
                    .filter(|&(id, d)| tree.node(id).is_leaf() && cfg.max_depth.is_none_or(|m| d < m))
                    .map(|(id, _)| id)
                    .collect();
                for &leaf in &leaves {
                    for &f in &features {
                        let grid = data.thresholds(f);
                        for &t in grid {
                            let mut next = tree.clone();
                            next.split(leaf, f, t);
                            let p = 1.0 / leaves.len() as f64 / features.len() as f64 / grid.len() as f64;
                            outcomes.push((next, p));
                        }
                    }
                }
            }
            MoveKind::Prune => {
                let nodes: Vec<NodeId> = tree
                    .internals()
                    .into_iter()
                    .filter(|&id| {
                        let (l, r) = tree.children(id).unwrap();
                        tree.node(l).is_leaf() && tree.node(r).is_leaf()
                    })
                    .collect();
                for &id in &nodes {
                    let mut next = tree.clone();
                    next.collapse(id);
                    outcomes.push((next, 1.0 / nodes.len() as f64));
                }
            }
            MoveKind::Change => {
                let nodes = tree.internals();
                for &id in &nodes {
                    for &f in &features {
                        let grid = data.thresholds(f);
                        for &t in grid {
                            let mut next = tree.clone();
                            next.set_split(id, f, t);
                            let p = 1.0 / nodes.len() as f64 / features.len() as f64 / grid.len() as f64;
                            outcomes.push((next, p));
                        }
                    }
                }
            }
            MoveKind::Swap => {
                let nodes = tree.internals();
                let m = nodes.len();
                for &a in &nodes {
                    for &b in &nodes {
                        if a == b {
                            continue;
                        }
                        let mut next = tree.clone();
                        let (fa, ta) = tree.split_of(a).unwrap();
                        let (fb, tb) = tree.split_of(b).unwrap();
                        next.set_split(a, fb, tb);
                        next.set_split(b, fa, ta);
                        outcomes.push((next, 1.0 / (m * (m - 1)) as f64));
                    }
                }
            }
        }
        if !outcomes.is_empty() {
            per_kind.push((kind, outcomes));
        }
    }

    let n_kinds = per_kind.len() as f64;
    per_kind
        .into_iter()
        .flat_map(|(kind, outcomes)| outcomes.into_iter().map(move |(t, p)| (kind, t, p / n_kinds)))
        .collect()
}

/// `ln` of the total probability that one proposal from `from` yields a tree
/// with the same structure as `to`; `None` if no single move does.
pub fn transition_log_prob(from: &Tree, to: &Tree, data: &Dataset, cfg: &MoveConfig) -> Option<f64> {
    let target = to.signature();
    let total: f64 = enumerate_transitions(from, data, cfg)
        .into_iter()
        .filter(|(_, t, _)| t.signature() == target)
        .map(|(_, _, p)| p)
        .sum();
    (total > 0.0).then(|| total.ln())
}
