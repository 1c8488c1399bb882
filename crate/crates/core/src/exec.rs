//! Execution strategy for the data-parallel sweeps (oracle grids, trace
//! scans, multi-start runs).
//!
//! With the `parallel` feature disabled every strategy runs sequentially.
//! Results never depend on the strategy.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Sequential
        }
    }
}

impl Execution {
    /// Order-preserving map over `0..len`.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Self::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Smallest index in `0..len` satisfying `pred`.
    pub fn position_first<F>(self, len: usize, pred: F) -> Option<usize>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Self::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().position_first(pred)
            }
            _ => (0..len).position(pred),
        }
    }

    /// Order-preserving map over a slice.
    pub fn map_slice<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }
}
