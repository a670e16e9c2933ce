//! Parallel execution helpers.
//!
//! Data-parallel loops run through rayon when the `parallel` feature is
//! enabled and [`Parallelism::Rayon`] is selected; otherwise they fall back
//! to plain sequential iteration. Keeping the switch at runtime lets the
//! benchmarks compare both paths within one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Rayon work-stealing pool. Falls back to sequential when the
    /// `parallel` feature is disabled.
    #[default]
    Rayon,
}

impl Parallelism {
    pub fn from_threads(threads: usize) -> Self {
        if threads <= 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Rayon
        }
    }
}

/// Map a function over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(par: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if par == Parallelism::Rayon {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = par;
    (0..n).map(f).collect()
}

/// Apply `f` to every element of a mutable slice, passing the index.
pub fn for_each_mut<T, F>(par: Parallelism, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if par == Parallelism::Rayon {
            items
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, item)| f(i, item));
            return;
        }
    }
    let _ = par;
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Sum of `f(i)` for `i in 0..n`. Chunked so the parallel reduction order is
/// deterministic for a fixed chunk size.
pub fn sum_indexed<F>(par: Parallelism, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1024;
    let n_chunks = n.div_ceil(CHUNK);
    let chunk_sum = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        s
    };
    #[cfg(feature = "parallel")]
    {
        if par == Parallelism::Rayon {
            let partials: Vec<f64> = (0..n_chunks).into_par_iter().map(chunk_sum).collect();
            return partials.iter().sum();
        }
    }
    let _ = par;
    (0..n_chunks).map(chunk_sum).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_sequential() {
        let a = map_indexed(Parallelism::Sequential, 100, |i| i * i);
        let b = map_indexed(Parallelism::Rayon, 100, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn sum_deterministic_across_strategies() {
        let f = |i: usize| (i as f64).sin() / (i as f64 + 1.0);
        let a = sum_indexed(Parallelism::Sequential, 10_000, f);
        let b = sum_indexed(Parallelism::Rayon, 10_000, f);
        assert_eq!(a, b);
    }
}
