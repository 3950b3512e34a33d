use rand::Rng;

use super::{initial_tree, mh_log_ratio, ChainState, LikelihoodMode, PosteriorSample, RetainedTree, RunStats, Scorer};
use crate::data::Dataset;
use crate::error::Result;
use crate::moves::propose;
use crate::params::Hyperparams;
use crate::runtime::{stream, Purpose};

/// Accepts iff `ln u <= log_alpha` for `u ~ U(0, 1]`. Never accepts `-inf`,
/// always accepts `log_alpha >= 0`.
pub fn metropolis_accept<R: Rng + ?Sized>(log_alpha: f64, rng: &mut R) -> bool {
    let u: f64 = 1.0 - rng.gen::<f64>();
    u.ln() <= log_alpha
}

pub(crate) fn step_with<R: Rng + ?Sized>(
    scorer: &Scorer<'_>,
    mut state: ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<(ChainState, f64)> {
    let prop = propose(&state.current, data, &hp.moves, rng)?;
    let (fitted, proposed_lj) = scorer.fit_and_score(prop.new_tree)?;
    let log_alpha = mh_log_ratio(state.current_log_joint, proposed_lj, prop.log_q_fwd, prop.log_q_rev);
    if metropolis_accept(log_alpha, rng) {
        state.current = fitted;
        state.current_log_joint = proposed_lj;
        state.accepted_count += 1;
    }
    state.iteration += 1;
    Ok((state, log_alpha))
}

/// One Metropolis-Hastings step with sequential likelihood evaluation.
pub fn mcmc_step<R: Rng + ?Sized>(
    state: ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<ChainState> {
    let scorer = Scorer::new(data, hp, LikelihoodMode::Sequential)?;
    step_with(&scorer, state, data, hp, rng).map(|(s, _)| s)
}

/// Runs `hp.iterations` steps from a fresh chain and keeps every state
/// after the first `hp.burn_in` steps.
pub fn run_mcmc(data: &Dataset, hp: &Hyperparams, mode: LikelihoodMode) -> Result<PosteriorSample> {
    run_mcmc_traced(data, hp, mode, |_| {})
}

/// [`run_mcmc`] reporting each step's log acceptance ratio to `trace`.
pub(crate) fn run_mcmc_traced(
    data: &Dataset,
    hp: &Hyperparams,
    mode: LikelihoodMode,
    mut trace: impl FnMut(f64),
) -> Result<PosteriorSample> {
    hp.validate()?;
    if data.splittable_features().is_empty() {
        return Err(crate::error::Error::DegenerateDataset);
    }
    let scorer = Scorer::new(data, hp, mode)?;
    let start = initial_tree(data, hp, &mut stream(hp.seed, Purpose::Init, 0, 0));
    let (current, current_log_joint) = scorer.fit_and_score(start)?;
    let mut state = ChainState {
        current,
        current_log_joint,
        iteration: 0,
        accepted_count: 0,
    };

    let mut rng = stream(hp.seed, Purpose::Chain, 0, 0);
    let mut trees = Vec::with_capacity(hp.iterations - hp.burn_in);
    for i in 0..hp.iterations {
        let (next, log_alpha) = step_with(&scorer, state, data, hp, &mut rng)?;
        state = next;
        trace(log_alpha);
        if i >= hp.burn_in {
            trees.push(RetainedTree {
                iteration: i,
                tree: state.current.clone(),
                log_joint: state.current_log_joint,
            });
        }
    }
    Ok(PosteriorSample {
        trees,
        stats: RunStats {
            steps: hp.iterations,
            proposals: hp.iterations,
            accepted: state.accepted_count,
        },
    })
}
