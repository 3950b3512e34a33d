//! Fixtures and brute-force oracles shared by the integration tests. The
//! oracles here recompute everything from the raw rows and never call into
//! the model module.

#![allow(dead_code)]

use std::collections::BTreeMap;

use bayestree_core::runtime::{stream, Purpose};
use bayestree_core::tree::Signature;
use bayestree_core::{Dataset, Tree};
use rand::Rng;

/// A tree shape with explicit splits, independent of the arena representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Leaf,
    Split(usize, f64, Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn depth(&self) -> usize {
        match self {
            Shape::Leaf => 0,
            Shape::Split(_, _, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn internals(&self) -> usize {
        match self {
            Shape::Leaf => 0,
            Shape::Split(_, _, l, r) => 1 + l.internals() + r.internals(),
        }
    }

    /// Leaf index (in left-to-right order) reached by `x`.
    fn route(&self, x: &[f64], offset: usize) -> usize {
        match self {
            Shape::Leaf => offset,
            Shape::Split(f, t, l, r) => {
                if x[*f] <= *t {
                    l.route(x, offset)
                } else {
                    r.route(x, offset + l.leaves())
                }
            }
        }
    }

    fn leaves(&self) -> usize {
        self.internals() + 1
    }

    fn splits(&self, out: &mut Vec<(usize, f64)>) {
        if let Shape::Split(f, t, l, r) = self {
            out.push((*f, *t));
            l.splits(out);
            r.splits(out);
        }
    }

    pub fn to_tree(&self, n_classes: usize) -> Tree {
        fn grow(shape: &Shape, tree: &mut Tree, at: usize) {
            if let Shape::Split(f, t, l, r) = shape {
                let (li, ri) = tree.split(at, *f, *t);
                grow(l, tree, li);
                grow(r, tree, ri);
            }
        }
        let mut tree = Tree::leaf(n_classes);
        let root = tree.root();
        grow(self, &mut tree, root);
        tree
    }

    pub fn signature(&self, n_classes: usize) -> Signature {
        self.to_tree(n_classes).signature()
    }
}

/// Midpoints between consecutive distinct values of column `f`.
pub fn grid(rows: &[Vec<f64>], f: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|r| r[f]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

/// Every shape of depth at most `max_depth` over the candidate grids.
pub fn all_shapes(rows: &[Vec<f64>], n_features: usize, max_depth: usize) -> Vec<Shape> {
    let splits: Vec<(usize, f64)> = (0..n_features)
        .flat_map(|f| grid(rows, f).into_iter().map(move |t| (f, t)))
        .collect();
    fn go(splits: &[(usize, f64)], depth: usize) -> Vec<Shape> {
        let mut out = vec![Shape::Leaf];
        if depth == 0 {
            return out;
        }
        let sub = go(splits, depth - 1);
        for &(f, t) in splits {
            for l in &sub {
                for r in &sub {
                    out.push(Shape::Split(f, t, Box::new(l.clone()), Box::new(r.clone())));
                }
            }
        }
        out
    }
    go(&splits, max_depth)
}

/// Every shape with at most `max_internals` internal nodes.
pub fn shapes_up_to(rows: &[Vec<f64>], n_features: usize, max_internals: usize) -> Vec<Shape> {
    let splits: Vec<(usize, f64)> = (0..n_features)
        .flat_map(|f| grid(rows, f).into_iter().map(move |t| (f, t)))
        .collect();
    // exactly[n] = shapes with exactly n internal nodes
    let mut exactly: Vec<Vec<Shape>> = vec![vec![Shape::Leaf]];
    for n in 1..=max_internals {
        let mut level = Vec::new();
        for &(f, t) in &splits {
            for left_n in 0..n {
                let right_n = n - 1 - left_n;
                for l in &exactly[left_n] {
                    for r in &exactly[right_n] {
                        level.push(Shape::Split(f, t, Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
            }
        }
        exactly.push(level);
    }
    exactly.into_iter().flatten().collect()
}

/// Unnormalized log posterior computed directly from the rows.
pub fn oracle_log_joint(
    shape: &Shape,
    rows: &[Vec<f64>],
    labels: &[usize],
    k: usize,
    a: f64,
    beta: f64,
    smoothing: f64,
) -> f64 {
    let n_features = rows[0].len();
    let mut counts = vec![vec![0usize; k]; shape.leaves()];
    for (x, &y) in rows.iter().zip(labels) {
        counts[shape.route(x, 0)][y] += 1;
    }
    let mut ll = 0.0;
    for c in &counts {
        let n: usize = c.iter().sum();
        for &ck in c {
            if ck > 0 {
                let p = (ck as f64 + smoothing) / (n as f64 + k as f64 * smoothing);
                ll += ck as f64 * p.ln();
            }
        }
    }
    let mut splits = Vec::new();
    shape.splits(&mut splits);
    let param: f64 = splits
        .iter()
        .map(|&(f, _)| -(n_features as f64).ln() - (grid(rows, f).len() as f64).ln())
        .sum();
    let tree = a.ln() - beta * (1.0 + shape.depth() as f64).ln();
    ll + param + tree
}

/// Exact posterior over every shape of depth at most `max_depth`.
pub fn exact_posterior(
    rows: &[Vec<f64>],
    labels: &[usize],
    k: usize,
    max_depth: usize,
    a: f64,
    beta: f64,
) -> BTreeMap<Signature, f64> {
    let shapes = all_shapes(rows, rows[0].len(), max_depth);
    let lj: Vec<f64> = shapes
        .iter()
        .map(|s| oracle_log_joint(s, rows, labels, k, a, beta, 1.0))
        .collect();
    let m = lj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = lj.iter().map(|l| (l - m).exp()).sum();
    shapes
        .iter()
        .zip(&lj)
        .map(|(s, l)| (s.signature(k), (l - m).exp() / z))
        .collect()
}

/// Largest absolute per-tree difference between two occupancy maps.
pub fn max_abs_diff(a: &BTreeMap<Signature, f64>, b: &BTreeMap<Signature, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|s| (a.get(s).copied().unwrap_or(0.0) - b.get(s).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// A 20-row toy problem with a small tree space.
pub struct Toy {
    pub name: &'static str,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub max_depth: usize,
}

impl Toy {
    pub fn dataset(&self) -> Dataset {
        Dataset::new(self.rows.clone(), self.labels.clone(), 2).unwrap()
    }

    pub fn posterior(&self, a: f64, beta: f64) -> BTreeMap<Signature, f64> {
        exact_posterior(&self.rows, &self.labels, 2, self.max_depth, a, beta)
    }
}

/// Three enumerable spaces: one feature with three thresholds and stumps
/// only (4 trees); two features with two and one thresholds, stumps only
/// (4 trees); one feature with one threshold up to depth 2 (5 trees).
pub fn toys() -> Vec<Toy> {
    let a_x = [
        0., 0., 0., 0., 0., 1., 1., 1., 1., 1., 2., 2., 2., 2., 2., 3., 3., 3., 3., 3.,
    ];
    let a_y = [0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1];
    let b_x0 = [
        0., 0., 0., 0., 0., 0., 0., 1., 1., 1., 1., 1., 1., 1., 2., 2., 2., 2., 2., 2.,
    ];
    let b_x1 = [
        0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1.,
    ];
    let b_y = [0, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 1, 1];
    let c_x = [
        0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1., 0., 1.,
    ];
    let c_y = [0, 1, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1];
    vec![
        Toy {
            name: "1 feature, 3 thresholds, depth<=1",
            rows: a_x.iter().map(|&x| vec![x]).collect(),
            labels: a_y.to_vec(),
            max_depth: 1,
        },
        Toy {
            name: "2 features, 2+1 thresholds, depth<=1",
            rows: b_x0.iter().zip(b_x1).map(|(&a, b)| vec![a, b]).collect(),
            labels: b_y.to_vec(),
            max_depth: 1,
        },
        Toy {
            name: "1 feature, 1 threshold, depth<=2",
            rows: c_x.iter().map(|&x| vec![x]).collect(),
            labels: c_y.to_vec(),
            max_depth: 2,
        },
    ]
}

/// Random rows with `levels` distinct values per feature and random labels.
pub fn random_dataset(seed: u64, n: usize, features: usize, levels: usize, k: usize) -> Dataset {
    let mut rng = stream(seed, Purpose::Synthetic, 99, 0);
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..features).map(|_| rng.gen_range(0..levels) as f64 * 0.5).collect())
            .collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        if let Ok(d) = Dataset::new(rows, labels, k) {
            if !d.splittable_features().is_empty() {
                return d;
            }
        }
    }
}

/// A random tree with up to `splits` internal nodes drawn from the grid.
pub fn random_tree<R: Rng>(data: &Dataset, splits: usize, rng: &mut R) -> Tree {
    let features = data.splittable_features();
    let mut tree = Tree::leaf(data.n_classes());
    for _ in 0..splits {
        let leaves = tree.leaves();
        let leaf = leaves[rng.gen_range(0..leaves.len())];
        let f = features[rng.gen_range(0..features.len())];
        let g = data.thresholds(f);
        tree.split(leaf, f, g[rng.gen_range(0..g.len())]);
    }
    tree
}
