//! Particle sampler with multinomial resampling.
//!
//! C particles each take one proposal per round, in parallel. A particle
//! always moves to its proposed tree and is weighted by the
//! Metropolis-Hastings ratio of that move; the weights are normalized and C
//! particles are drawn with replacement, all with weight 1/C again. The
//! round count is `iterations / C`, so the total number of proposals matches
//! a sequential chain of `iterations` steps.

use rand::Rng;

use super::{initial_tree, mh_log_ratio, LikelihoodMode, PosteriorSample, RetainedTree, RunStats, Scorer};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::moves::propose;
use crate::params::{Hyperparams, IncrementalWeight};
use crate::runtime::{stream, Purpose, WorkerPool};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub tree: Tree,
    pub log_joint: f64,
}

/// Particles with log weights. `normalized` means the weights' exponentials
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<P = Particle> {
    pub particles: Vec<P>,
    pub log_weights: Vec<f64>,
    pub normalized: bool,
}

impl<P: Clone> ParticleSet<P> {
    /// Equally weighted particles.
    pub fn uniform(particles: Vec<P>) -> Self {
        let w = -(particles.len() as f64).ln();
        Self {
            log_weights: vec![w; particles.len()],
            particles,
            normalized: true,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn normalize(&mut self) -> Result<()> {
        self.log_weights = normalize_weights(&self.log_weights)?;
        self.normalized = true;
        Ok(())
    }
}

/// Subtracts the log-sum-exp so that the exponentials sum to one.
pub fn normalize_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    if log_weights.iter().any(|w| w.is_nan()) {
        return Err(Error::CollapsedParticles);
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::CollapsedParticles);
    }
    if max == f64::INFINITY {
        // Infinite weights share all the mass equally.
        let n = log_weights.iter().filter(|&&w| w == f64::INFINITY).count() as f64;
        return Ok(log_weights
            .iter()
            .map(|&w| if w == f64::INFINITY { -n.ln() } else { f64::NEG_INFINITY })
            .collect());
    }
    let lse = max + log_weights.iter().map(|w| (w - max).exp()).sum::<f64>().ln();
    Ok(log_weights.iter().map(|w| w - lse).collect())
}

/// Draws `C` indices i.i.d. from the weight distribution and returns copies
/// of the selected particles, each with weight `1/C`.
pub fn multinomial_resample<P: Clone, R: Rng + ?Sized>(set: &ParticleSet<P>, rng: &mut R) -> Result<ParticleSet<P>> {
    let log_w = if set.normalized {
        set.log_weights.clone()
    } else {
        normalize_weights(&set.log_weights)?
    };
    let mut cdf = Vec::with_capacity(log_w.len());
    let mut acc = 0.0;
    for w in &log_w {
        acc += w.exp();
        cdf.push(acc);
    }
    let last_positive = log_w
        .iter()
        .rposition(|&w| w > f64::NEG_INFINITY)
        .ok_or(Error::CollapsedParticles)?;
    let particles = (0..set.len())
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(last_positive);
            set.particles[i].clone()
        })
        .collect();
    Ok(ParticleSet::uniform(particles))
}

fn incremental_log_weight(log_alpha: f64, mode: IncrementalWeight) -> f64 {
    match mode {
        IncrementalWeight::Ratio => log_alpha,
        IncrementalWeight::Capped => log_alpha.min(0.0),
    }
}

/// Runs `iterations / C` rounds with `C = hp.workers` particles and keeps
/// every post-resampling particle from the rounds after burn-in.
pub fn run_sumd(data: &Dataset, hp: &Hyperparams) -> Result<PosteriorSample> {
    hp.validate()?;
    if data.splittable_features().is_empty() {
        return Err(Error::DegenerateDataset);
    }
    let c = hp.workers;
    let rounds = hp.sumd_rounds();
    let burn_in = hp.sumd_burn_in();
    if rounds == 0 {
        return Err(Error::InvalidConfig(format!(
            "{} iterations leave no rounds for {c} particles",
            hp.iterations
        )));
    }
    if burn_in >= rounds {
        return Err(Error::InvalidConfig(format!(
            "burn-in of {burn_in} rounds leaves nothing of {rounds} rounds"
        )));
    }

    // Particles already run in parallel; each one scores sequentially.
    let scorer = Scorer::new(data, hp, LikelihoodMode::Sequential)?;
    let pool = WorkerPool::for_tasks(c)?;

    let indices: Vec<u64> = (0..c as u64).collect();
    let initial = pool.map_ordered(&indices, |_, &i| {
        let tree = initial_tree(data, hp, &mut stream(hp.seed, Purpose::Init, i, 0));
        scorer
            .fit_and_score(tree)
            .map(|(tree, log_joint)| Particle { tree, log_joint })
    })?;
    let mut set = ParticleSet::uniform(initial);

    let mut trees = Vec::with_capacity((rounds - burn_in) * c);
    for round in 0..rounds {
        let moved = pool.map_ordered(&set.particles, |i, p| -> Result<(Particle, f64)> {
            let mut rng = stream(hp.seed, Purpose::Propose, i as u64, round as u64);
            let prop = propose(&p.tree, data, &hp.moves, &mut rng)?;
            let (tree, log_joint) = scorer.fit_and_score(prop.new_tree)?;
            let log_alpha = mh_log_ratio(p.log_joint, log_joint, prop.log_q_fwd, prop.log_q_rev);
            Ok((
                Particle { tree, log_joint },
                incremental_log_weight(log_alpha, hp.sumd_weight),
            ))
        })?;
        let (particles, log_weights): (Vec<_>, Vec<_>) = moved.into_iter().unzip();
        let mut weighted = ParticleSet {
            particles,
            log_weights,
            normalized: false,
        };
        weighted.normalize()?;
        set = multinomial_resample(&weighted, &mut stream(hp.seed, Purpose::Resample, 0, round as u64))?;
        debug_assert_eq!(set.len(), c);

        if round >= burn_in {
            trees.extend(set.particles.iter().map(|p| RetainedTree {
                iteration: round,
                tree: p.tree.clone(),
                log_joint: p.log_joint,
            }));
        }
    }

    Ok(PosteriorSample {
        trees,
        stats: RunStats {
            steps: rounds,
            proposals: rounds * c,
            accepted: 0,
        },
    })
}
