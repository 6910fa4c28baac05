//! Order-preserving batch execution of independent jobs.
//!
//! With the `parallel` feature (the default) batches run on the rayon thread
//! pool; without it they run sequentially. Results always come back in input
//! order, so enabling parallelism never changes what callers observe.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `job` to every input, in parallel when the `parallel` feature is
/// enabled.
pub fn run_batch<I, T, F>(inputs: Vec<I>, job: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        inputs.into_par_iter().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inputs.into_iter().map(job).collect()
    }
}

/// Sequential twin of [`run_batch`], available regardless of features; the
/// benchmark suite compares the two.
pub fn run_batch_seq<I, T, F>(inputs: Vec<I>, job: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Send + Sync,
{
    inputs.into_iter().map(job).collect()
}
