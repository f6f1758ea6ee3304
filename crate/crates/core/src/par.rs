//! Data-parallel helpers. With the `parallel` feature (default) these run on
//! the rayon global pool; without it, or with [`Exec::Sequential`], they fall
//! back to plain iterators. Both paths return identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch of independent work items is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Auto,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Auto
    }
}

/// Map over a slice, preserving input order.
pub fn map<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Smallest `Some` result under `cmp`. `cmp` must be a total order over the
/// produced values so the answer does not depend on how work is split.
pub fn min_by<T, U, F, C>(exec: Exec, items: &[T], f: F, cmp: C) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
    C: Fn(&U, &U) -> std::cmp::Ordering + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().filter_map(f).min_by(|a, b| cmp(a, b));
    }
    let _ = exec;
    items.iter().filter_map(f).min_by(|a, b| cmp(a, b))
}
