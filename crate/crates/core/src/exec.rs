//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! Every parallel construct here is deterministic regardless of worker
//! count: each item is produced by a single task that runs serially, and
//! reductions happen in a fixed shape (indexed writes followed by pairwise
//! summation). Compiling without the `parallel` feature swaps every map
//! for its sequential twin without changing a single output bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential twin of [`map_indexed`]; always available (benchmarks compare
/// the two and non-`parallel` builds fall back to it).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Fill each row of a flat row-major buffer in parallel.
///
/// `f(i, row)` must only write through `row`; rows are disjoint so the
/// result is identical for any worker count.
#[cfg(feature = "parallel")]
pub fn for_each_row<F>(buf: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    buf.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_row<F>(buf: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    for_each_row_seq(buf, row_len, f);
}

/// Sequential twin of [`for_each_row`].
pub fn for_each_row_seq<F>(buf: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    for (i, row) in buf.chunks_mut(row_len).enumerate() {
        f(i, row);
    }
}

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, never on thread count, so sums are reproducible and the
/// rounding error grows like O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean via pairwise summation; 0 for an empty slice.
pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}
