//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over rayon's pool; without it, or with [`Execution::Sequential`], the same
//! closures run in order on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// `f(0) + … + f(count − 1)`.
    pub fn sum_range<F>(self, count: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..count)
                .into_par_iter()
                .map(f)
                .collect::<Vec<_>>()
                .iter()
                .sum(),
            _ => (0..count).map(f).sum(),
        }
    }
}
