//! Binary classification trees stored in a node arena.
//!
//! Internal nodes route a row left when `x[feature] <= threshold`; leaves hold
//! a class-probability vector. Node ids are arena slots: stable for the
//! lifetime of one tree value, meaningless across trees. Trees are plain
//! values, so a proposal mutates a clone and rejection just drops it.

use std::fmt;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    pub depth: usize,
    pub leaves: usize,
    pub internals: usize,
    /// Internal nodes whose children are both leaves.
    pub prunable: usize,
}

/// Structure of a tree independent of arena layout and leaf parameters:
/// the preorder sequence of splits, with `None` marking a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<Option<(usize, u64)>>);

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Option<Node>>,
    root: NodeId,
    free: Vec<NodeId>,
    n_classes: usize,
}

impl Tree {
    /// A single leaf with the uniform class distribution.
    pub fn leaf(n_classes: usize) -> Self {
        Self {
            nodes: vec![Some(Node::Leaf {
                probs: uniform(n_classes),
            })],
            root: 0,
            free: Vec::new(),
            n_classes,
        }
    }

    /// Builds a tree from an explicit arena. Fails if the result would
    /// violate the structural invariants.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId, n_classes: usize) -> Result<Self, String> {
        let tree = Self {
            nodes: nodes.into_iter().map(Some).collect(),
            root,
            free: Vec::new(),
            n_classes,
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Number of arena slots; every node id is below this.
    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// # Panics
    /// If `id` is not a live node of this tree.
    pub fn node(&self, id: NodeId) -> &Node {
        self.nodes[id].as_ref().expect("dead node id")
    }

    /// The leaf reached by `x`.
    #[inline]
    pub fn descend(&self, x: &[f64]) -> NodeId {
        let mut id = self.root;
        loop {
            match &self.nodes[id] {
                Some(Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                }) => id = if x[*feature] <= *threshold { *left } else { *right },
                _ => return id,
            }
        }
    }

    pub fn probs(&self, leaf: NodeId) -> &[f64] {
        match self.node(leaf) {
            Node::Leaf { probs } => probs,
            Node::Internal { .. } => panic!("node {leaf} is not a leaf"),
        }
    }

    pub fn set_probs(&mut self, leaf: NodeId, new: Vec<f64>) {
        debug_assert_eq!(new.len(), self.n_classes);
        match self.nodes[leaf].as_mut() {
            Some(Node::Leaf { probs }) => *probs = new,
            _ => panic!("node {leaf} is not a leaf"),
        }
    }

    /// `(feature, threshold)` of an internal node, `None` for a leaf.
    pub fn split_of(&self, id: NodeId) -> Option<(usize, f64)> {
        match self.node(id) {
            Node::Internal { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.node(id) {
            Node::Internal { left, right, .. } => Some((*left, *right)),
            Node::Leaf { .. } => None,
        }
    }

    /// Live nodes in preorder (node, then left subtree, then right) with their depth.
    pub fn preorder(&self) -> Vec<(NodeId, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, 0)];
        while let Some((id, depth)) = stack.pop() {
            out.push((id, depth));
            if let Some((l, r)) = self.children(id) {
                stack.push((r, depth + 1));
                stack.push((l, depth + 1));
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&(id, _)| self.node(id).is_leaf())
            .map(|(id, _)| id)
            .collect()
    }

    pub fn internals(&self) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&(id, _)| !self.node(id).is_leaf())
            .map(|(id, _)| id)
            .collect()
    }

    /// Internal nodes with two leaf children, in preorder.
    pub fn prunable(&self) -> Vec<NodeId> {
        self.internals()
            .into_iter()
            .filter(|&id| self.is_prunable(id))
            .collect()
    }

    fn is_prunable(&self, id: NodeId) -> bool {
        match self.children(id) {
            Some((l, r)) => self.node(l).is_leaf() && self.node(r).is_leaf(),
            None => false,
        }
    }

    pub fn depth(&self) -> usize {
        self.preorder().into_iter().map(|(_, d)| d).max().unwrap_or(0)
    }

    pub fn stats(&self) -> TreeStats {
        let mut stats = TreeStats {
            depth: 0,
            leaves: 0,
            internals: 0,
            prunable: 0,
        };
        for (id, depth) in self.preorder() {
            stats.depth = stats.depth.max(depth);
            if self.node(id).is_leaf() {
                stats.leaves += 1;
            } else {
                stats.internals += 1;
                if self.is_prunable(id) {
                    stats.prunable += 1;
                }
            }
        }
        stats
    }

    /// Turns `leaf` into an internal node with two fresh uniform leaves.
    /// Returns the new `(left, right)` ids.
    pub fn split(&mut self, leaf: NodeId, feature: usize, threshold: f64) -> (NodeId, NodeId) {
        assert!(self.node(leaf).is_leaf(), "can only split a leaf");
        let left = self.alloc(Node::Leaf {
            probs: uniform(self.n_classes),
        });
        let right = self.alloc(Node::Leaf {
            probs: uniform(self.n_classes),
        });
        self.nodes[leaf] = Some(Node::Internal {
            feature,
            threshold,
            left,
            right,
        });
        (left, right)
    }

    /// Replaces an internal node whose children are both leaves with a
    /// single uniform leaf.
    pub fn collapse(&mut self, id: NodeId) {
        assert!(self.is_prunable(id), "can only collapse a node with two leaf children");
        let (l, r) = self.children(id).unwrap();
        self.nodes[l] = None;
        self.nodes[r] = None;
        self.free.push(r);
        self.free.push(l);
        self.nodes[id] = Some(Node::Leaf {
            probs: uniform(self.n_classes),
        });
    }

    /// Overwrites the split parameters of an internal node.
    pub fn set_split(&mut self, id: NodeId, new_feature: usize, new_threshold: f64) {
        match self.nodes[id].as_mut() {
            Some(Node::Internal { feature, threshold, .. }) => {
                *feature = new_feature;
                *threshold = new_threshold;
            }
            _ => panic!("node {id} is not internal"),
        }
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id] = Some(node);
                id
            }
            None => {
                self.nodes.push(Some(node));
                self.nodes.len() - 1
            }
        }
    }

    pub fn signature(&self) -> Signature {
        Signature(
            self.preorder()
                .into_iter()
                .map(|(id, _)| self.split_of(id).map(|(f, t)| (f, t.to_bits())))
                .collect(),
        )
    }

    /// Same splits in the same places; leaf probabilities are ignored.
    pub fn same_structure(&self, other: &Tree) -> bool {
        self.signature() == other.signature()
    }

    /// Checks every structural invariant: a single root, each live node
    /// reachable exactly once, binary internal nodes, and leaf vectors on
    /// the probability simplex.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_classes < 1 {
            return Err("tree has no classes".into());
        }
        if self.root >= self.nodes.len() || self.nodes[self.root].is_none() {
            return Err(format!("root {} is not a live node", self.root));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut visited = 0;
        while let Some(id) = stack.pop() {
            let node = self
                .nodes
                .get(id)
                .and_then(Option::as_ref)
                .ok_or_else(|| format!("node {id} is referenced but not live"))?;
            if std::mem::replace(&mut seen[id], true) {
                return Err(format!("node {id} is reachable more than once"));
            }
            visited += 1;
            match node {
                Node::Internal {
                    threshold, left, right, ..
                } => {
                    if !threshold.is_finite() {
                        return Err(format!("node {id} has a non-finite threshold"));
                    }
                    if left == right {
                        return Err(format!("node {id} has identical children"));
                    }
                    stack.push(*right);
                    stack.push(*left);
                }
                Node::Leaf { probs } => {
                    if probs.len() != self.n_classes {
                        return Err(format!(
                            "leaf {id} has {} probabilities, expected {}",
                            probs.len(),
                            self.n_classes
                        ));
                    }
                    if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
                        return Err(format!("leaf {id} has a negative or NaN probability"));
                    }
                    let sum: f64 = probs.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(format!("leaf {id} probabilities sum to {sum}"));
                    }
                }
            }
        }
        let live = self.nodes.iter().filter(|n| n.is_some()).count();
        if visited != live {
            return Err(format!("{} live nodes are unreachable", live - visited));
        }
        Ok(())
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, depth) in self.preorder() {
            let pad = "  ".repeat(depth);
            match self.node(id) {
                Node::Internal { feature, threshold, .. } => writeln!(f, "{pad}x[{feature}] <= {threshold}")?,
                Node::Leaf { probs } => writeln!(f, "{pad}leaf {probs:?}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn uniform(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}
