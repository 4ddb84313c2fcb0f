//! Data-parallel helpers for seed sweeps and Monte-Carlo trials.
//!
//! With the `parallel` feature (default) these run on the rayon pool;
//! without it they fall back to plain iterators. Results are returned in
//! input order either way, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items` sequentially.
pub fn map_sequential<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Maps `f` over `items` on the rayon pool, preserving order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Parallel when the feature is enabled, sequential otherwise.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Maps then folds with an associative `reduce`. The reduction order
/// follows input order in both modes, keeping floating-point sums stable.
pub fn par_map_reduce<T, U, F, R>(items: Vec<T>, f: F, reduce: R) -> Option<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
    R: Fn(U, U) -> U,
{
    par_map(items, f).into_iter().reduce(reduce)
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = (0..100).collect();
        let out = par_map(v.clone(), |x| x * x);
        assert_eq!(out, map_sequential(v, |x| x * x));
        assert_eq!(par_map_reduce((1..=10).collect(), |x: u64| x, |a, b| a + b), Some(55));
    }
}
