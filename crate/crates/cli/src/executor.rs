use adaptive_abc_core::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Simulations scheduled per worker per batch.
const BATCH_PER_WORKER: usize = 32;

/// Thread-pool executor. Every index draws from its own substream, so results
/// do not depend on the worker count; only the number of speculative
/// (discarded) simulations does.
pub struct Rayon {
    pool: ThreadPool,
    workers: usize,
}

impl Rayon {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool, workers })
    }
}

impl Executor for Rayon {
    fn workers(&self) -> usize {
        self.workers
    }

    fn batch_size(&self) -> usize {
        self.workers * BATCH_PER_WORKER
    }

    fn map_indices<T, F>(&self, start: u64, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        self.pool
            .install(|| (start..start + count as u64).into_par_iter().map(&f).collect())
    }
}
