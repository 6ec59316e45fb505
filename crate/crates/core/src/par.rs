//! Execution strategy for the data-parallel sweeps.
//!
//! Tensor assembly, basin-seed ensembles and eigen scans are embarrassingly
//! parallel over an index range. With the `parallel` feature (default) they
//! fan out on the rayon pool; without it, or with [`ExecMode::Sequential`],
//! they run as plain loops. Either way the per-index results are collected
//! in index order and each index is computed by a single sequential closure,
//! so the output is bit-identical across modes and thread counts.

/// How an indexed sweep executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Plain loop on the calling thread.
    Sequential,
    /// Rayon pool; silently degrades to sequential when the crate is built
    /// without the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_elementwise() {
        let f = |i: usize| (i as f64).sqrt() * 1.000000001_f64.powi(i as i32);
        let seq = map_indexed(ExecMode::Sequential, 1000, f);
        let par = map_indexed(ExecMode::Parallel, 1000, f);
        assert_eq!(seq, par);
    }
}
