use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moves::MoveKind;

/// Restrictions on the proposal kernel. The default allows all four move
/// kinds at any depth; tests bound the depth to get enumerable tree spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveConfig {
    /// Leaves at this depth may not be split.
    pub max_depth: Option<usize>,
    pub kinds: Vec<MoveKind>,
}

impl Default for MoveConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            kinds: MoveKind::ALL.to_vec(),
        }
    }
}

impl MoveConfig {
    pub fn enabled(&self, kind: MoveKind) -> bool {
        self.kinds.contains(&kind)
    }
}

/// Incremental particle weight used by the SMC sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IncrementalWeight {
    /// The full Metropolis-Hastings ratio.
    #[default]
    Ratio,
    /// `min(1, ratio)`. Biased for a fixed target; kept for comparison runs.
    Capped,
}

/// Starting trees for chains and particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Init {
    #[default]
    Leaf,
    /// Random splits grown down to `max_depth` (each leaf split with probability 1/2).
    RandomGrow { max_depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Tree-prior constant `a`.
    pub a: f64,
    /// Depth penalty `beta`.
    pub beta: f64,
    pub iterations: usize,
    /// MCMC steps discarded before retention.
    pub burn_in: usize,
    /// Worker count C: SMC particle count and data-partition shard count.
    pub workers: usize,
    pub seed: u64,
    /// Pseudocount added to every class when fitting leaves.
    pub leaf_smoothing: f64,
    /// SMC rounds discarded before retention; `None` means half the rounds.
    pub sumd_burn_in_rounds: Option<usize>,
    pub sumd_weight: IncrementalWeight,
    pub init: Init,
    pub moves: MoveConfig,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            a: 1.0,
            beta: 1.0,
            iterations: 8000,
            burn_in: 4000,
            workers: crate::runtime::default_workers(),
            seed: 0,
            leaf_smoothing: 1.0,
            sumd_burn_in_rounds: None,
            sumd_weight: IncrementalWeight::default(),
            init: Init::default(),
            moves: MoveConfig::default(),
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta must be non-negative, got {}", self.beta));
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.burn_in >= self.iterations {
            return bad(format!(
                "burn-in ({}) must be less than iterations ({})",
                self.burn_in, self.iterations
            ));
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if !(self.leaf_smoothing.is_finite() && self.leaf_smoothing > 0.0) {
            return bad(format!("leaf smoothing must be positive, got {}", self.leaf_smoothing));
        }
        if self.moves.kinds.is_empty() {
            return bad("no move kinds enabled".into());
        }
        Ok(())
    }

    /// SMC rounds: `iterations / C`, so the total proposal count matches MCMC.
    pub fn sumd_rounds(&self) -> usize {
        self.iterations / self.workers
    }

    pub fn sumd_burn_in(&self) -> usize {
        self.sumd_burn_in_rounds.unwrap_or(self.sumd_rounds() / 2)
    }
}
