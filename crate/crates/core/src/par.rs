//! Map over an index range, in parallel when the `parallel` feature is on.
//!
//! Output order always follows the input range, so callers that do their own
//! per-item accumulation in a fixed order get schedule-independent results.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub(crate) fn map_range<T, S, I, F>(len: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len)
        .into_par_iter()
        .map_init(init, |s, i| f(s, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T, S, I, F>(len: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut scratch = init();
    (0..len).map(|i| f(&mut scratch, i)).collect()
}
