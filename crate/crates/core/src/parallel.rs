//! Data-parallel map helpers with a sequential fallback.
//!
//! With the `parallel` feature (the default) the `map_*` functions fan out
//! over rayon's thread pool; without it they run sequentially. The `*_seq`
//! variants are always sequential and serve as the reference path for the
//! benchmark suite. Output order matches input order in every case, so
//! results are identical bit for bit regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    map_range_seq(n, f)
}

/// Sequential reference implementation of [`map_range`].
pub fn map_range_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Map `f` over a slice, collecting results in input order.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over a slice, collecting results in input order.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_slice_seq(items, f)
}

/// Sequential reference implementation of [`map_slice`].
pub fn map_slice_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Cap the worker pool at `n` threads. A no-op without the `parallel`
/// feature. Returns an error if the pool was already initialized.
#[cfg(feature = "parallel")]
pub fn configure_workers(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Cap the worker pool at `n` threads. A no-op without the `parallel`
/// feature. Returns an error if the pool was already initialized.
#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_n: usize) -> Result<(), String> {
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order() {
        let out = map_range(100, |i| i * i);
        let expected = map_range_seq(100, |i| i * i);
        assert_eq!(out, expected);
    }

    #[test]
    fn map_slice_preserves_order() {
        let items: Vec<f64> = (0..64).map(|i| i as f64 * 0.5).collect();
        assert_eq!(map_slice(&items, |x| x * 2.0), map_slice_seq(&items, |x| x * 2.0));
    }
}
