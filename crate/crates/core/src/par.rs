//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon
//! pool; without it every call runs sequentially. Results are always
//! returned in input order, so outputs never depend on the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `0..len`, collecting results in index order.
pub fn map_range<R, F>(exec: Exec, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps `f` over a slice, collecting results in order.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Folds `0..len` in contiguous chunks and merges the partial results in
/// chunk order. `merge` must be associative.
pub fn fold_chunks<A, Fo, M>(exec: Exec, len: usize, chunk: usize, fold: Fo, merge: M) -> Option<A>
where
    A: Send,
    Fo: Fn(std::ops::Range<usize>) -> A + Sync + Send,
    M: Fn(A, A) -> A,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let parts = map_range(exec, chunks, |c| {
        fold(c * chunk..((c + 1) * chunk).min(len))
    });
    parts.into_iter().reduce(merge)
}
