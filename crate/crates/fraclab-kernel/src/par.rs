//! Deterministic data-parallel reductions.
//!
//! Work is split into fixed-size chunks whose partial sums are folded in
//! index order, so the result is bit-identical between the sequential build,
//! the parallel build, and any thread count.

/// Chunk length for partial sums.
pub const CHUNK: usize = 64;

#[cfg(feature = "parallel")]
pub fn indexed_sum(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    use rayon::prelude::*;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

#[cfg(not(feature = "parallel"))]
pub fn indexed_sum(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Applies `f` to every index and collects the results in order.
#[cfg(feature = "parallel")]
pub fn indexed_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_plain_loop_bitwise() {
        // Values spanning many magnitudes, where summation order matters.
        let f = |i: usize| ((i as f64) * 0.37).sin() * 10f64.powi((i % 7) as i32 - 3);
        let n: usize = 10_001;
        let mut plain = 0.0;
        let mut chunked = 0.0;
        for c in 0..n.div_ceil(CHUNK) {
            let mut acc = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc += f(i);
            }
            chunked += acc;
        }
        for i in 0..n {
            plain += f(i);
        }
        let fast = indexed_sum(n, f);
        assert_eq!(fast.to_bits(), chunked.to_bits());
        // chunked and plain differ only by rounding
        assert!((fast - plain).abs() < 1e-9 * plain.abs().max(1.0));
    }

    #[test]
    fn map_preserves_order() {
        let v = indexed_map(100, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 100);
    }
}
