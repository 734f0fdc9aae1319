use alloc::vec::Vec;

/// Runs independent indexed jobs, returning results in index order.
pub trait Executor: Sync {
    /// Worker count, recorded in run records.
    fn workers(&self) -> usize;

    /// How many simulations to schedule at once. Results past the point an
    /// iteration completes are discarded, so values above 1 trade wasted
    /// simulations for parallelism.
    fn batch_size(&self) -> usize;

    fn map_indices<T, F>(&self, start: u64, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync;
}

/// Single-threaded executor; schedules one simulation at a time so that the
/// number of model invocations equals the number charged to the budget.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn workers(&self) -> usize {
        1
    }

    fn batch_size(&self) -> usize {
        1
    }

    fn map_indices<T, F>(&self, start: u64, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        (start..start + count as u64).map(f).collect()
    }
}
