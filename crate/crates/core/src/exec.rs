//! Execution policy for the data-parallel loops (trajectory chunks, replicas).
//!
//! Every parallel loop in the crate goes through [`Execution::map_ordered`],
//! which always returns results in index order. Combined with per-index random
//! streams this makes outputs independent of the worker count.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool with the given number of workers (0 = rayon default).
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        workers: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: 0 }
    }
}

impl Execution {
    pub fn from_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }

    /// Number of items worth having in flight at once.
    pub fn width(&self) -> usize {
        match *self {
            Execution::Sequential => 1,
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers: 0 } => rayon::current_num_threads(),
            Execution::Parallel { workers } => workers.max(1),
        }
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map_ordered<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel { workers } => par_map(workers, n, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 0 {
        return (0..n).into_par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(_workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
