//! Deterministic reductions shared by the numerical modules.
//!
//! Parallel sums here are bit-reproducible for a fixed input, independent of
//! the rayon thread count: work is cut into fixed-size blocks, each block is
//! summed sequentially, and the block sums are combined by a pairwise tree in
//! index order.

use rayon::prelude::*;

/// Block width for deterministic parallel reductions.
pub const SUM_BLOCK: usize = 1024;

/// Pairwise (tree) sum of a slice in index order.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

/// Deterministic parallel sum of a slice.
pub fn det_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 4 * SUM_BLOCK {
        return tree_sum(xs);
    }
    let blocks: Vec<f64> = xs.par_chunks(SUM_BLOCK).map(tree_sum).collect();
    tree_sum(&blocks)
}

/// Deterministic parallel sum of `f(i)` for `i in 0..n`.
pub fn det_map_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if n <= 2 * SUM_BLOCK {
        let vals: Vec<f64> = (0..n).map(&f).collect();
        return tree_sum(&vals);
    }
    let nblocks = n.div_ceil(SUM_BLOCK);
    let blocks: Vec<f64> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * SUM_BLOCK;
            let hi = ((b + 1) * SUM_BLOCK).min(n);
            let vals: Vec<f64> = (lo..hi).map(&f).collect();
            tree_sum(&vals)
        })
        .collect();
    tree_sum(&blocks)
}

/// Dot product with deterministic parallel reduction.
pub fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    det_map_sum(a.len(), |i| a[i] * b[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_sequential_on_smooth_data() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let seq: f64 = xs.iter().sum();
        assert!((tree_sum(&xs) - seq).abs() < 1e-9);
        assert!((det_sum(&xs) - seq).abs() < 1e-9);
    }

    #[test]
    fn det_sum_is_reproducible_across_pool_sizes() {
        let xs: Vec<f64> = (0..50_000)
            .map(|i| (1.0 + i as f64).ln() * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let a = det_sum(&xs);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| det_sum(&xs));
        assert_eq!(a.to_bits(), b.to_bits());
        let c = det_map_sum(xs.len(), |i| xs[i]);
        let d = pool.install(|| det_map_sum(xs.len(), |i| xs[i]));
        assert_eq!(c.to_bits(), d.to_bits());
    }
}
