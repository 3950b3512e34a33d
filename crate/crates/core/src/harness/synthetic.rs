//! Planted-tree synthetic data. A hidden depth-3 tree over features on a
//! 101-level grid in [0, 1] labels each row; 10% of labels are then flipped
//! to a different class at random.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::runtime::{stream, Purpose};

const GRID_LEVELS: u32 = 100;
const PLANTED_DEPTH: usize = 3;
const LABEL_NOISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    pub seed: u64,
}

/// Desk-scale stand-ins for small/medium/big datasets with small/big
/// feature spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    SdSf,
    SdBf,
    MdSf,
    MdBf,
    BdSf,
    BdBf,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::SdSf,
        Preset::SdBf,
        Preset::MdSf,
        Preset::MdBf,
        Preset::BdSf,
        Preset::BdBf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SdSf => "SD/SF",
            Preset::SdBf => "SD/BF",
            Preset::MdSf => "MD/SF",
            Preset::MdBf => "MD/BF",
            Preset::BdSf => "BD/SF",
            Preset::BdBf => "BD/BF",
        }
    }

    pub fn spec(self, seed: u64) -> SyntheticSpec {
        let (rows, features) = match self {
            Preset::SdSf => (2_000, 8),
            Preset::SdBf => (2_000, 64),
            Preset::MdSf => (20_000, 8),
            Preset::MdBf => (20_000, 64),
            Preset::BdSf => (200_000, 8),
            Preset::BdBf => (200_000, 64),
        };
        SyntheticSpec {
            rows,
            features,
            classes: 4,
            seed,
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name().replace('/', "").to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown preset {s:?} (expected one of SD/SF, SD/BF, MD/SF, MD/BF, BD/SF, BD/BF)"))
    }
}

enum Planted {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Planted>,
        right: Box<Planted>,
    },
    Leaf(usize),
}

impl Planted {
    fn label(&self, x: &[f64]) -> usize {
        match self {
            Planted::Leaf(k) => *k,
            Planted::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.label(x)
                } else {
                    right.label(x)
                }
            }
        }
    }
}

fn plant<R: Rng>(
    depth: usize,
    features: usize,
    leaf_classes: &mut impl Iterator<Item = usize>,
    rng: &mut R,
) -> Planted {
    if depth == 0 {
        return Planted::Leaf(leaf_classes.next().unwrap());
    }
    let feature = rng.gen_range(0..features);
    let level = rng.gen_range(20..80u32);
    let threshold = (f64::from(level) + 0.5) / f64::from(GRID_LEVELS);
    let left = Box::new(plant(depth - 1, features, leaf_classes, rng));
    let right = Box::new(plant(depth - 1, features, leaf_classes, rng));
    Planted::Split {
        feature,
        threshold,
        left,
        right,
    }
}

fn attempt(spec: &SyntheticSpec, round: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = stream(spec.seed, Purpose::Synthetic, 0, round);
    let leaves = 1usize << PLANTED_DEPTH;
    let mut classes: Vec<usize> = (0..spec.classes).collect();
    classes.shuffle(&mut rng);
    let mut leaf_classes: Vec<usize> = (0..leaves).map(|i| classes[i % spec.classes]).collect();
    leaf_classes.shuffle(&mut rng);
    let tree = plant(PLANTED_DEPTH, spec.features, &mut leaf_classes.into_iter(), &mut rng);

    let mut features = Vec::with_capacity(spec.rows * spec.features);
    let mut labels = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let start = features.len();
        features.extend((0..spec.features).map(|_| f64::from(rng.gen_range(0..=GRID_LEVELS)) / f64::from(GRID_LEVELS)));
        let mut y = tree.label(&features[start..]);
        if rng.gen_bool(LABEL_NOISE) {
            let shift = rng.gen_range(1..spec.classes);
            y = (y + shift) % spec.classes;
        }
        labels.push(y);
    }
    (features, labels)
}

/// Deterministic in `spec`. Every class appears at least once.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.features == 0 || spec.classes < 2 {
        return Err(Error::InvalidConfig(format!(
            "synthetic data needs at least 1 feature and 2 classes, got {spec:?}"
        )));
    }
    if spec.rows < spec.classes {
        return Err(Error::InvalidConfig(format!(
            "{} rows cannot cover {} classes",
            spec.rows, spec.classes
        )));
    }
    const ATTEMPTS: u64 = 64;
    let mut last = None;
    for round in 0..ATTEMPTS {
        let (features, labels) = attempt(spec, round);
        let mut seen = vec![false; spec.classes];
        labels.iter().for_each(|&y| seen[y] = true);
        if seen.iter().all(|&s| s) {
            return Dataset::from_flat(features, spec.features, labels, spec.classes);
        }
        last = Some((features, labels));
    }
    // Tiny row counts with many classes: relabel the first rows outright.
    let (features, mut labels) = last.unwrap();
    for (k, y) in labels.iter_mut().take(spec.classes).enumerate() {
        *y = k;
    }
    Dataset::from_flat(features, spec.features, labels, spec.classes)
}
