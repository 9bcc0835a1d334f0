//! Worker-count-independent summation.
//!
//! Inputs are cut into fixed [`CHUNK`]-sized blocks, each block is summed
//! sequentially, and block sums are combined by a balanced pairwise tree.
//! The tree shape depends only on the input length, so results are
//! bitwise identical for any thread pool.

use std::ops::{Add, Range};

use rayon::prelude::*;

pub const CHUNK: usize = 256;

/// Pairwise tree sum of `values`; the split point is always `len / 2`.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    match values.len() {
        0 => T::default(),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Sums `f(0) + … + f(len - 1)` deterministically, evaluating blocks in parallel.
pub fn parallel_sum<T, F>(len: usize, f: F) -> T
where
    T: Copy + Add<Output = T> + Default + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    let blocks = len.div_ceil(CHUNK);
    let partial: Vec<T> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * CHUNK).min(len);
            (b * CHUNK..end).fold(T::default(), |acc, i| acc + f(i))
        })
        .collect();
    pairwise_sum(&partial)
}

/// Elementwise sum of `f(block)` over fixed `block`-sized ranges of `0..len`,
/// combined by the same balanced tree as [`pairwise_sum`].
pub fn parallel_block_sum<F>(len: usize, block: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(Range<usize>) -> Vec<f64> + Sync,
{
    let block = block.max(1);
    let blocks = len.div_ceil(block);
    let partial: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| f(b * block..((b + 1) * block).min(len)))
        .collect();
    pairwise_vec(&partial, width)
}

fn pairwise_vec(values: &[Vec<f64>], width: usize) -> Vec<f64> {
    match values.len() {
        0 => vec![0.0; width],
        1 => values[0].clone(),
        n => {
            let (a, b) = values.split_at(n / 2);
            let mut left = pairwise_vec(a, width);
            for (l, r) in left.iter_mut().zip(pairwise_vec(b, width)) {
                *l += r;
            }
            left
        }
    }
}

/// Runs `op` on a dedicated pool of `workers` threads (0 means rayon's default).
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction");
    pool.install(op)
}
