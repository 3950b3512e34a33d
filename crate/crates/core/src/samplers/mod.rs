//! The three inference procedures over one model: a Metropolis-Hastings
//! chain, the same chain with data-partitioned likelihood evaluation, and a
//! particle sampler that replaces accept/reject with weighting and
//! multinomial resampling.

mod mcmc;
mod sumd;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use mcmc::{mcmc_step, metropolis_accept, run_mcmc};
pub use sumd::{multinomial_resample, normalize_weights, run_sumd, Particle, ParticleSet};

use crate::data::Dataset;
use crate::error::Result;
use crate::model::{self, Partition};
use crate::moves::Proposal;
use crate::params::{Hyperparams, Init};
use crate::runtime::WorkerPool;
use crate::tree::{Signature, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcmc,
    Sumd,
    Dp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mcmc => "mcmc",
            Method::Sumd => "sumd",
            Method::Dp => "dp",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mcmc" => Ok(Method::Mcmc),
            "sumd" => Ok(Method::Sumd),
            "dp" => Ok(Method::Dp),
            other => Err(format!("unknown method {other:?} (expected mcmc, sumd or dp)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How a chain evaluates the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LikelihoodMode {
    Sequential,
    /// Rows split into `min(C, N)` shards evaluated on the worker pool.
    Partitioned,
}

/// Current state of one Markov chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: Tree,
    /// Cached `log_joint(current)`.
    pub current_log_joint: f64,
    pub iteration: usize,
    pub accepted_count: usize,
}

impl ChainState {
    /// Fits the leaves of `tree` and caches its log joint.
    pub fn new(tree: Tree, data: &Dataset, hp: &Hyperparams) -> Self {
        let current = model::fit_leaves(&tree, data, hp.leaf_smoothing);
        let current_log_joint = model::log_joint(&current, data, hp);
        Self {
            current,
            current_log_joint,
            iteration: 0,
            accepted_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetainedTree {
    /// Chain step (MCMC) or round (SMC) at which the tree was stored.
    pub iteration: usize,
    pub tree: Tree,
    pub log_joint: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunStats {
    /// Chain steps or particle rounds executed.
    pub steps: usize,
    pub proposals: usize,
    /// Accepted MCMC moves; zero for the particle sampler.
    pub accepted: usize,
}

/// Trees kept after burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    pub trees: Vec<RetainedTree>,
    pub stats: RunStats,
}

impl PosteriorSample {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn mean_depth(&self) -> f64 {
        self.mean_of(|t| t.depth() as f64)
    }

    pub fn mean_leaves(&self) -> f64 {
        self.mean_of(|t| t.stats().leaves as f64)
    }

    fn mean_of(&self, f: impl Fn(&Tree) -> f64) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|r| f(&r.tree)).sum::<f64>() / self.trees.len() as f64
    }

    /// Fraction of retained trees per distinct structure.
    pub fn occupancy(&self) -> BTreeMap<Signature, f64> {
        let mut counts: BTreeMap<Signature, usize> = BTreeMap::new();
        for r in &self.trees {
            *counts.entry(r.tree.signature()).or_default() += 1;
        }
        let n = self.trees.len() as f64;
        counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
    }
}

/// Refits and scores trees, sequentially or over data shards.
pub(crate) struct Scorer<'a> {
    data: &'a Dataset,
    hp: &'a Hyperparams,
    sharded: Option<(Partition, WorkerPool)>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(data: &'a Dataset, hp: &'a Hyperparams, mode: LikelihoodMode) -> Result<Self> {
        let sharded = match mode {
            LikelihoodMode::Sequential => None,
            LikelihoodMode::Partitioned => {
                let shards = hp.workers.min(data.n_rows());
                Some((Partition::even(data.n_rows(), shards)?, WorkerPool::for_tasks(shards)?))
            }
        };
        Ok(Self { data, hp, sharded })
    }

    /// Refits the leaves of `tree` and returns it with its log joint.
    pub(crate) fn fit_and_score(&self, mut tree: Tree) -> Result<(Tree, f64)> {
        let (data, hp) = (self.data, self.hp);
        let prior = model::log_param_prior(&tree, data) + model::log_tree_prior(&tree, hp);
        match &self.sharded {
            None => {
                model::refit_leaves(&mut tree, data, hp.leaf_smoothing);
                if prior == f64::NEG_INFINITY {
                    return Ok((tree, prior));
                }
                let ll = model::log_likelihood(&tree, data);
                Ok((tree, ll + prior))
            }
            Some((part, pool)) => {
                model::partitioned_refit_leaves(&mut tree, data, part, pool, hp.leaf_smoothing)?;
                if prior == f64::NEG_INFINITY {
                    return Ok((tree, prior));
                }
                let ll = model::partitioned_log_likelihood(&tree, data, part, pool)?;
                Ok((tree, ll + prior))
            }
        }
    }
}

/// `ln` of the Metropolis-Hastings ratio from cached log joints.
pub(crate) fn mh_log_ratio(current_log_joint: f64, proposed_log_joint: f64, log_q_fwd: f64, log_q_rev: f64) -> f64 {
    if proposed_log_joint == f64::NEG_INFINITY || log_q_rev == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if current_log_joint == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (proposed_log_joint - current_log_joint) + (log_q_rev - log_q_fwd)
}

/// `ln alpha = [ln p(T') - ln p(T)] + [ln q(T|T') - ln q(T'|T)]` with the
/// proposed tree's leaves refitted.
pub fn acceptance_log_ratio(current: &ChainState, prop: &Proposal, data: &Dataset, hp: &Hyperparams) -> f64 {
    let fitted = model::fit_leaves(&prop.new_tree, data, hp.leaf_smoothing);
    let proposed = model::log_joint(&fitted, data, hp);
    mh_log_ratio(current.current_log_joint, proposed, prop.log_q_fwd, prop.log_q_rev)
}

/// Starting tree for a chain or particle.
pub(crate) fn initial_tree<R: Rng + ?Sized>(data: &Dataset, hp: &Hyperparams, rng: &mut R) -> Tree {
    let mut tree = Tree::leaf(data.n_classes());
    if let Init::RandomGrow { max_depth } = hp.init {
        let features = data.splittable_features();
        if features.is_empty() {
            return tree;
        }
        let mut frontier = vec![(tree.root(), 0usize)];
        while let Some((leaf, depth)) = frontier.pop() {
            if depth >= max_depth || !rng.gen_bool(0.5) {
                continue;
            }
            let f = features[rng.gen_range(0..features.len())];
            let grid = data.thresholds(f);
            let t = grid[rng.gen_range(0..grid.len())];
            let (l, r) = tree.split(leaf, f, t);
            frontier.push((r, depth + 1));
            frontier.push((l, depth + 1));
        }
    }
    tree
}

/// Runs the configured method on the whole dataset.
pub fn run(method: Method, data: &Dataset, hp: &Hyperparams) -> Result<PosteriorSample> {
    match method {
        Method::Mcmc => run_mcmc(data, hp, LikelihoodMode::Sequential),
        Method::Dp => run_mcmc(data, hp, LikelihoodMode::Partitioned),
        Method::Sumd => run_sumd(data, hp),
    }
}
