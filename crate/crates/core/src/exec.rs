//! Execution helpers: data-parallel loops with a sequential fallback, and
//! deterministic reductions.
//!
//! Every bulk loop in this crate goes through [`fill_indexed`] or
//! [`pairwise_sum_by`]. With the `parallel` feature the loops run on the
//! rayon pool; without it (or inside [`with_sequential`]) they run on the
//! calling thread. Reductions always use the same fixed pairwise tree over
//! the linearization order, so results are bit-identical across runs,
//! thread counts, and both execution modes.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with data-parallel execution disabled on the calling thread.
///
/// Used by the benchmark suite to compare the rayon path against the
/// sequential one without rebuilding the crate.
pub fn with_sequential<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SEQUENTIAL.with(|c| {
        let prev = c.replace(true);
        let out = f();
        c.set(prev);
        out
    })
}

#[inline]
pub(crate) fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Fills `out[i] = f(i)` for every index, in parallel when enabled.
pub(crate) fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
            return;
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Cutoff below which a pairwise sum runs as a plain in-order loop.
const PAIRWISE_LEAF: usize = 64;
/// Minimum length worth splitting across threads.
const PAR_SPLIT: usize = 1 << 14;

fn pairwise_leaf<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    let mut acc = 0.0;
    for i in lo..hi {
        acc += f(i);
    }
    acc
}

fn pairwise_seq<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    if hi - lo <= PAIRWISE_LEAF {
        return pairwise_leaf(lo, hi, f);
    }
    let mid = lo + (hi - lo) / 2;
    pairwise_seq(lo, mid, f) + pairwise_seq(mid, hi, f)
}

#[cfg(feature = "parallel")]
fn pairwise_par<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, f: &F) -> f64 {
    if hi - lo <= PAR_SPLIT {
        return pairwise_seq(lo, hi, f);
    }
    // Same split point as the sequential tree, so the float result is
    // identical regardless of which threads run the halves.
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(|| pairwise_par(lo, mid, f), || pairwise_par(mid, hi, f));
    a + b
}

/// Deterministic pairwise-tree sum of `f(0) + f(1) + ... + f(len-1)`.
pub fn pairwise_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            return pairwise_par(0, len, &f);
        }
    }
    pairwise_seq(0, len, &f)
}

/// Deterministic pairwise-tree sum of a slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    pairwise_sum_by(v.len(), |i| v[i])
}

/// `y[i] += a * x[i]` over disjoint slices, in parallel when enabled.
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            y.par_iter_mut()
                .zip(x.par_iter())
                .for_each(|(yi, xi)| *yi += a * xi);
            return;
        }
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Maximum of `f(i)`; order-independent, so a plain parallel reduce is fine.
pub(crate) fn max_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..len)
                .into_par_iter()
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
    }
    let mut m = f64::NEG_INFINITY;
    for i in 0..len {
        m = m.max(f(i));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), (10_000.0 * 9_999.0) / 2.0);
    }

    #[test]
    fn pairwise_is_identical_in_both_modes() {
        let v: Vec<f64> = (0..100_000u64)
            .map(|i| ((i * 2654435761 % 1000) as f64 - 499.5) * 1e-3)
            .collect();
        let par = pairwise_sum(&v);
        let seq = with_sequential(|| pairwise_sum(&v));
        assert_eq!(par.to_bits(), seq.to_bits());
    }
}
