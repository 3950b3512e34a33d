//! JSON serialization of retained posterior samples.
//!
//! ```json
//! { "format_version": 1, "method": "sumd", "hyperparams": {..},
//!   "n_features": 8, "n_classes": 2, "label_names": ["a", "b"],
//!   "trees": [ { "iteration": 4000, "log_joint": -812.3,
//!                "nodes": [ {"kind": "internal", "feature": 0, "threshold": 0.5, "children": [1, 2]},
//!                           {"kind": "leaf", "probs": [0.9, 0.1]}, .. ] } ] }
//! ```
//!
//! Nodes are listed in preorder; node 0 is the root.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Hyperparams;
use crate::samplers::{Method, PosteriorSample, RetainedTree, RunStats};
use crate::tree::{Node, Tree};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NodeRecord {
    Internal {
        feature: usize,
        threshold: f64,
        children: [usize; 2],
    },
    Leaf {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub iteration: usize,
    /// `null` when the log joint is not finite.
    pub log_joint: Option<f64>,
    pub nodes: Vec<NodeRecord>,
}

impl TreeRecord {
    pub fn from_tree(r: &RetainedTree) -> Self {
        let order = r.tree.preorder();
        let mut position = vec![usize::MAX; r.tree.arena_len()];
        for (pos, &(id, _)) in order.iter().enumerate() {
            position[id] = pos;
        }
        let nodes = order
            .iter()
            .map(|&(id, _)| match r.tree.node(id) {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => NodeRecord::Internal {
                    feature: *feature,
                    threshold: *threshold,
                    children: [position[*left], position[*right]],
                },
                Node::Leaf { probs } => NodeRecord::Leaf { probs: probs.clone() },
            })
            .collect();
        Self {
            iteration: r.iteration,
            log_joint: r.log_joint.is_finite().then_some(r.log_joint),
            nodes,
        }
    }

    pub fn to_tree(&self, n_classes: usize) -> Result<RetainedTree> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                NodeRecord::Internal {
                    feature,
                    threshold,
                    children: [l, r],
                } => Node::Internal {
                    feature: *feature,
                    threshold: *threshold,
                    left: *l,
                    right: *r,
                },
                NodeRecord::Leaf { probs } => Node::Leaf { probs: probs.clone() },
            })
            .collect();
        let tree = Tree::from_nodes(nodes, 0, n_classes).map_err(Error::Model)?;
        Ok(RetainedTree {
            iteration: self.iteration,
            tree,
            log_joint: self.log_joint.unwrap_or(f64::NEG_INFINITY),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub method: Method,
    pub hyperparams: Hyperparams,
    pub n_features: usize,
    pub n_classes: usize,
    pub label_names: Vec<String>,
    pub trees: Vec<TreeRecord>,
}

impl ModelFile {
    pub fn new(
        method: Method,
        hyperparams: &Hyperparams,
        n_features: usize,
        label_names: &[String],
        sample: &PosteriorSample,
    ) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            method,
            hyperparams: hyperparams.clone(),
            n_features,
            n_classes: label_names.len(),
            label_names: label_names.to_vec(),
            trees: sample.trees.iter().map(TreeRecord::from_tree).collect(),
        }
    }

    pub fn to_sample(&self) -> Result<PosteriorSample> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.trees.is_empty() {
            return Err(Error::Model("model holds no trees".into()));
        }
        if self.label_names.len() != self.n_classes {
            return Err(Error::Model("label names do not match the class count".into()));
        }
        let trees = self
            .trees
            .iter()
            .map(|t| t.to_tree(self.n_classes))
            .collect::<Result<Vec<_>>>()?;
        for t in &trees {
            let max_feature = t
                .tree
                .internals()
                .into_iter()
                .filter_map(|id| t.tree.split_of(id))
                .map(|(f, _)| f)
                .max();
            if max_feature.is_some_and(|f| f >= self.n_features) {
                return Err(Error::Model(format!(
                    "tree at iteration {} splits on an unknown feature",
                    t.iteration
                )));
            }
        }
        Ok(PosteriorSample {
            trees,
            stats: RunStats::default(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
