//! Execution substrate: a bounded worker pool with order-preserving maps,
//! counter-derived random streams, and wall-clock measurement.
//!
//! This is the only module that creates threads. Every task receives its
//! own stream keyed by `(seed, purpose, index, round)`, so results depend on
//! the inputs and the worker *count* an algorithm asks for, never on how
//! tasks happen to be scheduled.

use std::fmt::Display;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "BAYESTREE_WORKERS";

/// `BAYESTREE_WORKERS` if set to a positive integer, else the number of
/// logical cores.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Random generator handed to tasks.
pub type TaskRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Purpose {
    Chain,
    Propose,
    Resample,
    Init,
    Folds,
    Synthetic,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Chain => 0x6368_6169_6e00_0001,
            Purpose::Propose => 0x7072_6f70_6f73_0002,
            Purpose::Resample => 0x7265_7361_6d70_0003,
            Purpose::Init => 0x696e_6974_0000_0004,
            Purpose::Folds => 0x666f_6c64_7300_0005,
            Purpose::Synthetic => 0x7379_6e74_6800_0006,
        }
    }
}

/// A reproducible random stream identified by a root seed and a key.
///
/// The key's `(purpose, index)` pair is hashed with the root seed into a
/// ChaCha key; `round` selects the ChaCha stream. Any worker can construct
/// any stream on its own without coordinating with the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub root: u64,
    pub purpose: Purpose,
    pub index: u64,
    pub round: u64,
}

impl RngStream {
    pub fn new(root: u64, purpose: Purpose, index: u64, round: u64) -> Self {
        Self {
            root,
            purpose,
            index,
            round,
        }
    }

    pub fn rng(&self) -> TaskRng {
        let mut state = self.root ^ mix64(self.purpose.tag()) ^ mix64(self.index ^ 0x5851_f42d_4c95_7f2d);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.round);
        rng
    }
}

/// Convenience for `RngStream::new(..).rng()`.
pub fn stream(root: u64, purpose: Purpose, index: u64, round: u64) -> TaskRng {
    RngStream::new(root, purpose, index, round).rng()
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    mix64(*state)
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A bounded pool of worker threads. With one thread, tasks run inline on
/// the caller.
pub struct WorkerPool {
    pool: Option<rayon::ThreadPool>,
    threads: usize,
}

impl WorkerPool {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::InvalidConfig("worker pool needs at least one thread".into()));
        }
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .thread_name(|i| format!("bayestree-worker-{i}"))
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { pool, threads })
    }

    /// A pool sized for `tasks` concurrent tasks, capped by [`default_workers`].
    pub fn for_tasks(tasks: usize) -> Result<Self> {
        Self::new(tasks.clamp(1, default_workers().max(1)))
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Maps `task` over `inputs`; the output is positionally aligned with the
    /// input and identical to a sequential map. If any task fails, the
    /// lowest failing index is reported.
    pub fn map_ordered<T, R, E, F>(&self, inputs: &[T], task: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        E: Display + Send,
        F: Fn(usize, &T) -> Result<R, E> + Sync + Send,
    {
        let results: Vec<Result<R, E>> = match &self.pool {
            Some(pool) => pool.install(|| inputs.par_iter().enumerate().map(|(i, x)| task(i, x)).collect()),
            None => inputs.iter().enumerate().map(|(i, x)| task(i, x)).collect(),
        };
        results
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                r.map_err(|e| Error::Task {
                    index,
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

/// One-shot ordered parallel map with a fresh pool of `workers` threads.
pub fn parallel_map_ordered<T, R, E, F>(inputs: &[T], workers: usize, task: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    E: Display + Send,
    F: Fn(usize, &T) -> Result<R, E> + Sync + Send,
{
    WorkerPool::new(workers)?.map_ordered(inputs, task)
}

/// A measured phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
    pub workers: usize,
}

/// Summary over repeated runs, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub repetitions: usize,
}

impl TimingSummary {
    pub fn from_samples(samples: &[Duration]) -> Self {
        assert!(!samples.is_empty(), "need at least one sample");
        let mut secs: Vec<f64> = samples.iter().map(Duration::as_secs_f64).collect();
        secs.sort_by(f64::total_cmp);
        let n = secs.len();
        let median = if n % 2 == 1 {
            secs[n / 2]
        } else {
            (secs[n / 2 - 1] + secs[n / 2]) / 2.0
        };
        Self {
            min: secs[0],
            median,
            mean: secs.iter().sum::<f64>() / n as f64,
            repetitions: n,
        }
    }
}

/// Runs `f` `repetitions` times on the monotonic clock.
pub fn benchmark<F: FnMut()>(repetitions: usize, mut f: F) -> TimingSummary {
    let repetitions = repetitions.max(1);
    let samples: Vec<Duration> = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .collect();
    TimingSummary::from_samples(&samples)
}

/// Runs `f` once and returns its output with the elapsed time.
pub fn timed<R>(label: impl Into<String>, workers: usize, f: impl FnOnce() -> R) -> (R, Timing) {
    let start = Instant::now();
    let out = f();
    let timing = Timing {
        label: label.into(),
        seconds: start.elapsed().as_secs_f64(),
        workers,
    };
    (out, timing)
}
