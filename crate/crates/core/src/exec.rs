//! Trial fan-out. With the `parallel` feature (default) work is spread over a
//! rayon pool; without it everything runs on the calling thread. Results are
//! always returned in index order, so output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Self::Parallel;
        #[cfg(not(feature = "parallel"))]
        Self::Sequential
    }
}

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PLINEQ_WORKERS";

pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Sizes the global pool from `workers` or [`WORKERS_ENV`]. A no-op without
/// the `parallel` feature or when the pool is already initialized.
pub fn init_workers(workers: Option<usize>) {
    let requested = workers.or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok());
    #[cfg(feature = "parallel")]
    if let Some(n) = requested.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = requested;
}
