//! Data-parallel helpers. With the `parallel` feature off everything runs on
//! the calling thread and `Execution::Parallel` degrades to sequential.

use crate::error::Result;
use crate::index::Index;
use crate::query::{query, Mode, QueryResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, keeping input order in the output.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Runs every pattern against `index`; results line up with `patterns`.
pub fn query_batch(
    index: &Index,
    patterns: &[Vec<u8>],
    mode: Mode,
    exec: Execution,
) -> Vec<Result<QueryResult>> {
    map_ordered(patterns, exec, |p| query(index, p, mode))
}
