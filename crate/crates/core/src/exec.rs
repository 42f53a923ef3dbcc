//! Replica execution: data-parallel with rayon when the `parallel` feature is
//! on, a plain loop otherwise. Results always come back in replica order.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon thread pool; falls back to [`Execution::Sequential`] without the
    /// `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to replicas `0..n`, returning results indexed by replica.
pub fn map_replicas<T, F>(exec: Execution, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_replicas`], failing with the lowest failing replica's error
/// tagged by its index.
pub fn try_map_replicas<T, F>(exec: Execution, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    map_replicas(exec, n, |r| f(r).map_err(|e| (r, e)))
        .into_iter()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|(r, e)| match e {
            Error::SimulationAborted(msg) => Error::SimulationAborted(format!("replica {r}: {msg}")),
            other => other,
        })
}
