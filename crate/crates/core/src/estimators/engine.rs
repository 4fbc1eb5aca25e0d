//! Replica-parallel Monte Carlo driver.
//!
//! Replicas are numbered `0..n` and replica `i` reads only the streams with
//! `stream_id = i`. Replicas are grouped into fixed blocks of [`BLOCK`]; each
//! block is tallied sequentially and block tallies are merged in block order,
//! so the floating-point reduction is the same for any worker count.

use std::time::Instant;

use rayon::prelude::*;

use super::stats::Tally;
use crate::error::{Error, Result};

pub const BLOCK: u64 = 4096;

/// Seed and parallelism shared by every estimator call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub master_seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(master_seed: u64, workers: usize) -> Self {
        RunConfig {
            master_seed,
            workers: workers.max(1),
        }
    }

    /// Same workers, seed replaced.
    pub fn with_seed(&self, master_seed: u64) -> Self {
        RunConfig {
            master_seed,
            workers: self.workers,
        }
    }
}

/// Runs `replica(i, &mut tally)` for `i in 0..n` and returns the merged tally
/// together with the elapsed wall time in seconds.
pub fn run_replicas<T, F>(n: u64, cfg: &RunConfig, replica: F) -> Result<(T, f64)>
where
    T: Tally,
    F: Fn(u64, &mut T) + Sync,
{
    let start = Instant::now();
    let blocks = n.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let mut tally = T::default();
        for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
            replica(i, &mut tally);
        }
        tally
    };
    let partials: Vec<T> = if cfg.workers == 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut total = T::default();
    for p in partials {
        total.merge(p);
    }
    Ok((total, start.elapsed().as_secs_f64()))
}
