//! Deterministic Monte Carlo harness.
//!
//! Samples are pure functions of (master seed, sample index), the parallel
//! map preserves index order, and every reduction runs sequentially over
//! that order, so results are bit-identical for any worker count.

use rayon::prelude::*;

/// Map `job` over sample indices 0..count, in parallel on `workers`
/// threads (0 = rayon's default). The output order is the index order.
pub fn run_samples<T, F>(count: usize, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let run = || (0..count as u64).into_par_iter().map(&job).collect();
    if workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool")
            .install(run)
    }
}

/// Mean, unbiased variance, and standard error of one batch of samples at
/// one point on the study's parameter axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointStats {
    pub axis: f64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Two-pass summary in index order; bitwise stable across worker counts.
pub fn summarize(axis: f64, xs: &[f64]) -> PointStats {
    assert!(xs.len() > 1, "need at least two samples for a variance");
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    PointStats {
        axis,
        mean,
        variance,
        stderr: (variance / n).sqrt(),
        count: xs.len(),
    }
}

/// One statistic across the parameter axis of a study.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub label: String,
    pub t: f64,
    pub p: f64,
    pub config_hash: u64,
    pub points: Vec<PointStats>,
}

/// FNV-1a, for tagging outputs with the generating config.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1_0000_0000_01b3);
    }
    h
}
