//! Data-parallel map helpers. With the `parallel` feature (default) the
//! work is spread over rayon's thread pool; without it everything runs
//! sequentially. Output ordering is by index either way, so results are
//! identical between the two modes.

/// Execution strategy for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl ExecMode {
    /// Preferred mode for the current build: parallel when compiled in.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

/// Map `f` over `0..n`, collecting results in index order. Splitting is
/// capped at ~64 batches so that grids of cheap per-point jobs (a 4×4
/// eigensolve takes ~2 µs) are not swamped by scheduling overhead, while
/// small collections of heavy jobs (Monte-Carlo streams) still split
/// fully.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            let min_len = (n / 64).max(1);
            (0..n).into_par_iter().with_min_len(min_len).map(f).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_auto_agree() {
        let a = map_indexed(ExecMode::Sequential, 100, |i| i * i);
        let b = map_indexed(ExecMode::auto(), 100, |i| i * i);
        assert_eq!(a, b);
    }
}
