//! Index-driven map helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the fallible maps fan out over
//! rayon; without it they run sequentially. Callers pass a closure of the
//! item *index* and do their own sub-seeding, so both execution modes give
//! identical results. The `*_seq` variants are always sequential and exist
//! so benchmarks and equality tests can compare the two paths directly.

use crate::error::Result;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
/// The first error (if any) aborts the map.
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` sequentially (the `parallel` feature is disabled).
#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    try_map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`try_map_indexed`].
pub fn try_map_indexed_seq<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Caps the global rayon thread pool. A no-op without the `parallel`
/// feature; `threads = 0` keeps the default. Must be called before any
/// parallel work; later calls are ignored (rayon pins the global pool).
pub fn init_thread_pool(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
