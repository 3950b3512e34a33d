//! Training data: a dense row-major feature matrix with integer class labels,
//! plus the per-feature threshold grid that every split is drawn from.

use crate::error::{Error, Result};

/// N rows of F real features with labels in `0..n_classes`.
///
/// Split thresholds live on a discrete grid: the midpoints between
/// consecutive distinct observed values of each feature. A constant feature
/// has no candidates and can never be split on.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n_rows: usize,
    n_features: usize,
    n_classes: usize,
    feature_meta: Vec<Vec<f64>>,
    thresholds: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from rows of features.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_features) {
            return Err(Error::InvalidDataset(format!(
                "row {i} has {} features, expected {n_features}",
                r.len()
            )));
        }
        let flat = rows.into_iter().flatten().collect();
        Self::from_flat(flat, n_features, labels, n_classes)
    }

    /// Builds a dataset from a row-major buffer of `labels.len() * n_features` values.
    pub fn from_flat(features: Vec<f64>, n_features: usize, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let n_rows = labels.len();
        if n_rows == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidDataset("no features".into()));
        }
        if n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if features.len() != n_rows * n_features {
            return Err(Error::InvalidDataset(format!(
                "feature buffer has {} values, expected {}",
                features.len(),
                n_rows * n_features
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= n_classes) {
            return Err(Error::InvalidDataset(format!(
                "row {i} has label {y}, but there are only {n_classes} classes"
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value in row {}, feature {}",
                pos / n_features,
                pos % n_features
            )));
        }

        let mut feature_meta = Vec::with_capacity(n_features);
        let mut thresholds = Vec::with_capacity(n_features);
        for f in 0..n_features {
            let mut column: Vec<f64> = (0..n_rows).map(|i| features[i * n_features + f]).collect();
            column.sort_by(f64::total_cmp);
            column.dedup();
            thresholds.push(column.windows(2).map(|w| midpoint(w[0], w[1])).collect());
            feature_meta.push(column);
        }

        Ok(Self {
            features,
            labels,
            n_rows,
            n_features,
            n_classes,
            feature_meta,
            thresholds,
        })
    }

    /// Rows selected by `indices`, in that order. The threshold grid is
    /// rebuilt from the selected rows only.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::from_flat(features, self.n_features, labels, self.n_classes)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sorted distinct values observed in column `feature`.
    pub fn feature_meta(&self, feature: usize) -> &[f64] {
        &self.feature_meta[feature]
    }

    /// Candidate split thresholds for `feature`, strictly increasing.
    pub fn thresholds(&self, feature: usize) -> &[f64] {
        &self.thresholds[feature]
    }

    /// Features with at least one candidate threshold.
    pub fn splittable_features(&self) -> Vec<usize> {
        (0..self.n_features)
            .filter(|&f| !self.thresholds[f].is_empty())
            .collect()
    }

    /// Whether `threshold` is exactly one of the candidates for `feature`.
    pub fn is_candidate(&self, feature: usize, threshold: f64) -> bool {
        feature < self.n_features
            && self.thresholds[feature]
                .binary_search_by(|c| c.total_cmp(&threshold))
                .is_ok()
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    // Guard against rounding pushing the midpoint onto an endpoint.
    if m > lo && m < hi {
        m
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
            vec![0, 1, 0, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn meta_holds_distinct_sorted_values() {
        let d = toy();
        assert_eq!(d.feature_meta(0), &[1.0, 2.0, 3.0]);
        assert_eq!(d.thresholds(0), &[1.5, 2.5]);
        assert_eq!(d.feature_meta(1), &[5.0]);
        assert!(d.thresholds(1).is_empty());
        assert_eq!(d.splittable_features(), vec![0]);
        assert!(d.is_candidate(0, 2.5));
        assert!(!d.is_candidate(0, 2.4));
        assert!(!d.is_candidate(1, 5.0));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(Dataset::new(vec![], vec![], 2).is_err());
        assert!(Dataset::new(vec![vec![]], vec![0], 2).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![0], 1).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![2], 2).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]], vec![0], 2).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1], 2).is_err());
    }

    #[test]
    fn subset_rebuilds_grid() {
        let d = toy();
        let s = d.subset(&[0, 2]).unwrap();
        assert_eq!(s.n_rows(), 2);
        assert_eq!(s.thresholds(0), &[1.5]);
        assert_eq!(s.labels(), &[0, 0]);
    }
}
