//! Deterministic block execution.
//!
//! Every data-parallel loop in this crate maps independent block indices to
//! partial results and folds them in index order, so the output is identical
//! whether the blocks run on rayon (the `parallel` feature, on by default)
//! or on the current thread.

/// Maps `0..n` through `f`, in parallel when the `parallel` feature is on.
/// Results come back in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_blocks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `0..n` through `f`, in parallel when the `parallel` feature is on.
/// Results come back in index order.
#[cfg(not(feature = "parallel"))]
pub(crate) fn map_blocks<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Always-sequential twin of [`map_blocks`]; the fallback path, kept callable
/// under any feature set so benches and tests can compare the two.
pub(crate) fn map_blocks_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Splits `total` items into blocks of at most `block_size`, returning
/// `(block_count, last_block_len)`.
pub(crate) fn block_layout(total: u64, block_size: u64) -> (u64, u64) {
    assert!(block_size > 0);
    if total == 0 {
        return (0, 0);
    }
    let blocks = total.div_ceil(block_size);
    let last = total - (blocks - 1) * block_size;
    (blocks, last)
}
