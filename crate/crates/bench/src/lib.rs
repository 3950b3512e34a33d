//! Shared fixtures for the criterion benchmarks.

use bayestree_core::harness::{generate_synthetic, SyntheticSpec};
use bayestree_core::{Dataset, Hyperparams, Tree};

pub fn dataset(rows: usize, features: usize) -> Dataset {
    generate_synthetic(&SyntheticSpec {
        rows,
        features,
        classes: 4,
        seed: 11,
    })
    .expect("valid synthetic spec")
}

/// A complete tree of the given depth with mid-grid splits cycling through features.
pub fn complete_tree(data: &Dataset, depth: usize) -> Tree {
    let mut tree = Tree::leaf(data.n_classes());
    let mut frontier = vec![tree.root()];
    for level in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (i, leaf) in frontier.into_iter().enumerate() {
            let feature = (level + i) % data.n_features();
            let grid = data.thresholds(feature);
            let (l, r) = tree.split(leaf, feature, grid[grid.len() / 2]);
            next.push(l);
            next.push(r);
        }
        frontier = next;
    }
    bayestree_core::model::fit_leaves(&tree, data, 1.0)
}

pub fn hyperparams(iterations: usize, workers: usize) -> Hyperparams {
    Hyperparams {
        iterations,
        burn_in: iterations / 2,
        workers,
        seed: 5,
        ..Hyperparams::default()
    }
}
