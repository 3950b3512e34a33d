//! Bayesian classification trees.
//!
//! One model, three samplers: a sequential Metropolis-Hastings chain over
//! tree structures, the same chain with data-partitioned likelihood
//! evaluation, and a parallel particle sampler that replaces accept/reject
//! with multinomial resampling. The [`harness`] module wraps them with data
//! loading, cross-validation, scaling sweeps and report output.

pub mod data;
pub mod error;
pub mod harness;
pub mod model;
pub mod moves;
pub mod params;
pub mod runtime;
pub mod samplers;
pub mod tree;

pub use data::Dataset;
pub use error::{Error, Result};
pub use moves::{MoveKind, Proposal};
pub use params::{Hyperparams, IncrementalWeight, Init, MoveConfig};
pub use samplers::{LikelihoodMode, Method, PosteriorSample};
pub use tree::{Node, NodeId, Tree, TreeStats};
