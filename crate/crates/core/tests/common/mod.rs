//! Shared helpers for the integration suites: Monte Carlo error estimates,
//! paired z statistics, and an independent random-walk Metropolis sampler
//! used as an oracle against the library's own samplers.
//!
//! Each integration target compiles its own copy, and none of them uses
//! every helper.
#![allow(dead_code)]

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use spatweib::rng::rng_from_seed;

/// Batch-means standard error of the mean of a possibly autocorrelated
/// sequence: split into `n_batches` consecutive batches, take the standard
/// error of the batch means.
pub fn batch_se(samples: &[f64], n_batches: usize) -> f64 {
    assert!(n_batches >= 2, "need at least two batches");
    let b = samples.len() / n_batches;
    assert!(b >= 1, "not enough samples for {n_batches} batches");
    let used = b * n_batches;
    let grand = samples[..used].iter().sum::<f64>() / used as f64;
    let var = (0..n_batches)
        .map(|j| {
            let m = samples[j * b..(j + 1) * b].iter().sum::<f64>() / b as f64;
            (m - grand) * (m - grand)
        })
        .sum::<f64>()
        / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}

/// Plain mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// z statistic for "these paired differences have mean zero".
pub fn paired_z(diffs: &[f64]) -> f64 {
    let n = diffs.len() as f64;
    let m = mean(diffs);
    let var = diffs.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return 0.0;
    }
    m / (var / n).sqrt()
}

/// Random-walk Metropolis over an arbitrary log target on R^p.
///
/// Deliberately written from scratch (spherical Gaussian proposals, plain
/// accept/reject) so it shares no machinery with the library's samplers;
/// used as the oracle side when validating them. Returns `n_keep` states
/// taken every `thin` steps after `n_burn` burn-in steps.
pub fn rw_mh<F: Fn(&DVector<f64>) -> f64>(
    log_target: F,
    init: DVector<f64>,
    step: f64,
    n_keep: usize,
    n_burn: usize,
    thin: usize,
    seed: u64,
) -> Vec<DVector<f64>> {
    assert!(thin >= 1);
    let mut rng = rng_from_seed(seed);
    let p = init.len();
    let mut x = init;
    let mut fx = log_target(&x);
    assert!(fx.is_finite(), "oracle must start at a point of positive density");
    let mut kept = Vec::with_capacity(n_keep);
    let total = n_burn + n_keep * thin;
    for it in 0..total {
        let prop = DVector::from_fn(p, |j, _| x[j] + step * rng.sample::<f64, _>(StandardNormal));
        let fp = log_target(&prop);
        if fp.is_finite() && rng.random::<f64>().ln() < fp - fx {
            x = prop;
            fx = fp;
        }
        if it >= n_burn && (it - n_burn) % thin == thin - 1 {
            kept.push(x.clone());
        }
    }
    kept
}
