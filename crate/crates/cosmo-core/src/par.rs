//! Execution strategy for component-wise tensor work.
//!
//! The tensor layer computes arrays of independent symbolic components,
//! which parallelizes trivially. With the `parallel` feature enabled
//! (the default) the work runs on a work-stealing thread pool; a
//! runtime switch can force the sequential path so benchmarks can
//! compare both strategies inside one binary. Without the feature the
//! sequential path is the only one compiled in.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL_ENABLED: AtomicBool = AtomicBool::new(true);

/// Turn the parallel path on or off at runtime. Has no effect when the
/// `parallel` feature is compiled out.
pub fn set_parallel(enabled: bool) {
    PARALLEL_ENABLED.store(enabled, Ordering::Relaxed);
}

/// Whether the next `map_indexed` call will use the thread pool.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL_ENABLED.load(Ordering::Relaxed)
}

/// Compute `f(0), f(1), ..., f(n-1)`, in parallel when enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if PARALLEL_ENABLED.load(Ordering::Relaxed) {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(&f).collect();
        }
    }
    (0..n).map(f).collect()
}
