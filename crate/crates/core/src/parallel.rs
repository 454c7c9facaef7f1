//! Thin switch between rayon and sequential execution.
//!
//! Every reduction here is schedule-independent: maxima are combined with a
//! deterministic tie-break on the item index, and element-wise maps write to
//! disjoint slots. Sums are never parallelized; callers keep them in fixed
//! index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maximum of `eval(i)` over `0..n`, skipping `None` entries.
/// Ties are broken toward the smaller index, so the witness is the same
/// regardless of thread count.
pub fn max_indexed<T, F>(n: usize, eval: F) -> Option<(f64, usize, T)>
where
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
    T: Send,
{
    let combine = |a: Option<(f64, usize, T)>, b: Option<(f64, usize, T)>| match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    };

    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| eval(i).map(|(v, t)| (v, i, t)))
            .reduce(|| None, combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n)
            .map(|i| eval(i).map(|(v, t)| (v, i, t)))
            .fold(None, combine)
    }
}

/// Element-wise map into a fresh vector; slots are independent.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
