//! Sequential / data-parallel execution of per-node work.
//!
//! Every parallel path computes each output element independently and writes
//! it to its own slot, so results are bit-identical to the sequential path.

/// How per-node loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Parallel when the `parallel` feature is enabled and the job is large enough.
    #[default]
    Auto,
    Sequential,
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    Parallel,
}

const AUTO_THRESHOLD: usize = 256;

impl Execution {
    pub fn is_parallel(self, len: usize) -> bool {
        if !cfg!(feature = "parallel") {
            return false;
        }
        match self {
            Execution::Sequential => false,
            Execution::Parallel => true,
            Execution::Auto => len >= AUTO_THRESHOLD,
        }
    }
}

/// Evaluates `f(i)` for `i in 0..len` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel(len) {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Like [`map_indexed`] but short-circuits on the first error (lowest index
/// in the sequential case, any failing index in the parallel case).
pub fn try_map_indexed<T, E, F>(exec: Execution, len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel(len) {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}
