//! Simulation studies: synthetic data generation, replicated fits, and
//! frequentist operating characteristics of the posterior.
//!
//! A [`SimDesign`] describes one scenario: locations uniform on a square,
//! covariates iid uniform(0,1), a latent field drawn from either the
//! multivariate log-gamma law (the model's own prior — well-specified) or a
//! mean-zero Gaussian with the same exponential covariance (deliberate
//! misspecification), and Weibull losses with rate `exp(x'β_true + w)`.
//!
//! [`run_study`] fits every replicate with [`run_chain`] and aggregates,
//! per regression coefficient: bias and MSE of the posterior mean, the
//! across-replicate SD of the posterior means, and the coverage rate of the
//! 95% equal-tailed credible interval. Replicates run in parallel on seeds
//! derived from `(seed, replicate)`, so results do not depend on thread
//! scheduling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mlg::{mlg_sample, MLGParams};
use crate::model::{
    run_chain, weibull_sample, ChainState, Dataset, Hyperparams, PosteriorDraws,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spatial::{distance_matrix, exp_covariogram, matrix_sqrt, CoordMode, LocationSet};

/// Which law generates the latent spatial field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatentLaw {
    /// Multivariate log-gamma — matches the fitted model.
    Mlg,
    /// Mean-zero Gaussian with the same covariance — misspecified fit.
    Gaussian,
}

/// One simulation scenario.
#[derive(Clone, Debug)]
pub struct SimDesign {
    /// Observations per replicate.
    pub n: usize,
    /// True (and fitted) Weibull shape.
    pub k: f64,
    /// True regression coefficients; also sets p.
    pub beta_true: DVector<f64>,
    /// Side length of the square spatial domain.
    pub domain_side: f64,
    /// True spatial range.
    pub phi_true: f64,
    /// True spatial scale.
    pub sigma_w_true: f64,
    /// Law of the latent field.
    pub w_law: LatentLaw,
    /// Log-gamma shape of the latent field (MLG law only; also the fitting
    /// prior's shape).
    pub alpha_w: f64,
    /// Log-gamma scale of the latent field (as above).
    pub kappa_w: f64,
    /// Number of replicates.
    pub n_replicates: usize,
    /// Gibbs sweeps per replicate.
    pub n_iter: usize,
    /// Burn-in sweeps per replicate.
    pub n_burn: usize,
    /// Master seed; every replicate derives its own streams from it.
    pub seed: u64,
}

impl SimDesign {
    /// The printed defaults: β = (−1,−1,−1), unit square side 3, φ = 5,
    /// σ_w = 1, MLG latent law with α_w = κ_w = 1, 100 replicates of
    /// 5000 sweeps with 2000 burn-in.
    pub fn new(n: usize, k: f64) -> Self {
        Self {
            n,
            k,
            beta_true: DVector::from_row_slice(&[-1.0, -1.0, -1.0]),
            domain_side: 3.0,
            phi_true: 5.0,
            sigma_w_true: 1.0,
            w_law: LatentLaw::Mlg,
            alpha_w: 1.0,
            kappa_w: 1.0,
            n_replicates: 100,
            n_iter: 5000,
            n_burn: 2000,
            seed: 0,
        }
    }

    /// Validate all scalar ranges and the chain-length ordering.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("design needs at least one observation"));
        }
        if self.beta_true.is_empty() || !self.beta_true.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("beta_true must be nonempty and finite"));
        }
        for (name, v) in [
            ("k", self.k),
            ("domain_side", self.domain_side),
            ("phi_true", self.phi_true),
            ("sigma_w_true", self.sigma_w_true),
            ("alpha_w", self.alpha_w),
            ("kappa_w", self.kappa_w),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.n_replicates == 0 {
            return Err(Error::invalid("need at least one replicate"));
        }
        if self.n_iter == 0 || self.n_iter <= self.n_burn {
            return Err(Error::invalid(format!(
                "need n_iter > n_burn, got n_iter = {}, n_burn = {}",
                self.n_iter, self.n_burn
            )));
        }
        Ok(())
    }

    /// The fitting hyperparameters implied by the design: defaults with the
    /// design's shape and latent-field prior settings.
    pub fn fitting_hyper(&self) -> Hyperparams {
        let mut h = Hyperparams::new(self.k);
        h.alpha_w = self.alpha_w;
        h.kappa_w = self.kappa_w;
        h
    }
}

/// Operating characteristics of one parameter across replicates.
#[derive(Clone, Debug)]
pub struct MetricsRow {
    /// Parameter label (`beta_1`, …).
    pub name: String,
    /// Generating value.
    pub truth: f64,
    /// Mean of (posterior mean − truth) across replicates.
    pub bias: f64,
    /// Across-replicate standard deviation of the posterior means
    /// (divisor R−1; 0 when R = 1).
    pub sd: f64,
    /// Mean squared error of the posterior means about the truth.
    pub mse: f64,
    /// Fraction of replicates whose 95% equal-tailed interval covers truth.
    pub cr: f64,
}

/// The aggregated study result.
#[derive(Clone, Debug)]
pub struct SimMetrics {
    /// One row per regression coefficient.
    pub rows: Vec<MetricsRow>,
    /// Replicates that finished and entered the aggregates.
    pub n_used: usize,
    /// Replicates dropped because the fit failed (logged individually).
    pub n_failed: usize,
}

/// Generate one synthetic dataset plus the generating state.
///
/// Locations are uniform on `[0, side]²` (redrawn, with a warning, in the
/// measure-zero event of an exact duplicate), covariates iid uniform(0,1),
/// the latent field follows the design's law with covariance
/// `σ_w² exp(−dist/φ)`, and losses are Weibull with rate `exp(x'β + w)`.
///
/// The returned [`ChainState`] holds the generating β, W, `log σ_w`, and φ;
/// its `log_sigma` is set to 0 — the β prior scale is an inference device
/// with no generating-process counterpart.
pub fn generate_dataset<R: Rng + ?Sized>(
    design: &SimDesign,
    rng: &mut R,
) -> Result<(Dataset, ChainState)> {
    design.validate()?;
    let n = design.n;
    let p = design.beta_true.len();

    let locs = {
        let mut attempt = 0;
        loop {
            let coords: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    [
                        rng.random_range(0.0..design.domain_side),
                        rng.random_range(0.0..design.domain_side),
                    ]
                })
                .collect();
            match LocationSet::new(coords, CoordMode::Planar) {
                Ok(l) => break l,
                Err(e) => {
                    attempt += 1;
                    log::warn!("duplicate sampled locations ({e}); resampling");
                    if attempt >= 10 {
                        return Err(Error::Numerical(
                            "failed to sample distinct locations after 10 attempts".into(),
                        ));
                    }
                }
            }
        }
    };

    let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());

    let dist = distance_matrix(&locs);
    let cov = exp_covariogram(&dist, design.phi_true, design.sigma_w_true)?;
    let sqrt_cov = matrix_sqrt(&cov)?;
    let w = match design.w_law {
        LatentLaw::Mlg => {
            let prior = MLGParams::new(
                DVector::zeros(n),
                sqrt_cov,
                DVector::from_element(n, design.alpha_w),
                DVector::from_element(n, design.kappa_w),
            )?;
            mlg_sample(&prior, rng)
        }
        LatentLaw::Gaussian => {
            let gauss = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            sqrt_cov * gauss
        }
    };

    let mut z = DVector::zeros(n);
    for i in 0..n {
        let mut eta = w[i];
        for j in 0..p {
            eta += x[(i, j)] * design.beta_true[j];
        }
        z[i] = weibull_sample(design.k, eta.exp(), rng)?;
    }

    let truth = ChainState {
        beta: design.beta_true.clone(),
        w,
        log_sigma: 0.0,
        log_sigma_w: design.sigma_w_true.ln(),
        phi: design.phi_true,
    };
    Ok((Dataset::new(locs, x, z)?, truth))
}

/// Posterior means and 95% equal-tailed intervals for the β block of one
/// fitted replicate.
struct RepEstimate {
    mean: DVector<f64>,
    intervals: Vec<(f64, f64)>,
}

fn estimate_from_draws(draws: &PosteriorDraws) -> Result<RepEstimate> {
    let rows = crate::diagnostics::posterior_summary(draws, 0.95)?;
    let p = draws.p();
    let mean = DVector::from_fn(p, |j, _| rows[j].mean);
    let intervals = (0..p).map(|j| (rows[j].eq_lo, rows[j].eq_hi)).collect();
    Ok(RepEstimate { mean, intervals })
}

/// Run the full study: generate, fit, and aggregate per-coefficient
/// bias, SD, MSE, and coverage. See [`run_study_with`] internals for the
/// replicate protocol; failures are logged, excluded, and counted.
pub fn run_study(design: &SimDesign) -> Result<SimMetrics> {
    run_study_with(design, |data, _truth, chain_seed| {
        let draws = run_chain(data, &design.fitting_hyper(), design.n_iter, design.n_burn, chain_seed)?;
        estimate_from_draws(&draws)
    })
}

/// The study loop with the fitter abstracted out (tests inject mocks).
///
/// Replicate `r` draws its dataset from `derive_seed(seed, 2r)` and fits
/// with `derive_seed(seed, 2r+1)`, so any subset of replicates reproduces
/// identically regardless of parallel scheduling.
fn run_study_with<F>(design: &SimDesign, fitter: F) -> Result<SimMetrics>
where
    F: Fn(&Dataset, &ChainState, u64) -> Result<RepEstimate> + Sync,
{
    design.validate()?;
    let p = design.beta_true.len();
    let outcomes: Vec<Result<(RepEstimate, DVector<f64>)>> = (0..design.n_replicates)
        .into_par_iter()
        .map(|r| {
            let mut data_rng = rng_from_seed(derive_seed(design.seed, 2 * r as u64));
            let chain_seed = derive_seed(design.seed, 2 * r as u64 + 1);
            let (data, truth) = generate_dataset(design, &mut data_rng)?;
            let est = fitter(&data, &truth, chain_seed)?;
            if est.mean.len() != p || est.intervals.len() != p {
                return Err(Error::invalid("fitter returned wrong-sized estimates"));
            }
            Ok((est, truth.beta))
        })
        .collect();

    let mut used: Vec<(RepEstimate, DVector<f64>)> = Vec::new();
    let mut n_failed = 0usize;
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => used.push(v),
            Err(e) => {
                n_failed += 1;
                log::warn!("replicate {r} failed and was excluded: {e}");
            }
        }
    }
    if used.is_empty() {
        return Err(Error::Numerical(format!(
            "all {} replicates failed",
            design.n_replicates
        )));
    }

    let r_used = used.len() as f64;
    let mut rows = Vec::with_capacity(p);
    for j in 0..p {
        let truth = design.beta_true[j];
        let ests: Vec<f64> = used.iter().map(|(e, _)| e.mean[j]).collect();
        let mean_est = ests.iter().sum::<f64>() / r_used;
        let bias = mean_est - truth;
        let var = if used.len() > 1 {
            ests.iter().map(|e| (e - mean_est) * (e - mean_est)).sum::<f64>() / (r_used - 1.0)
        } else {
            0.0
        };
        let mse = ests.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>() / r_used;
        let covered = used
            .iter()
            .filter(|(e, _)| e.intervals[j].0 <= truth && truth <= e.intervals[j].1)
            .count();
        let cr = covered as f64 / r_used;

        // Definitional identity: MSE decomposes into squared bias plus the
        // population variance of the estimates.
        let decomposed = bias * bias + var * (r_used - 1.0) / r_used;
        assert!(
            (mse - decomposed).abs() <= 1e-10 * (1.0 + mse.abs()),
            "mse decomposition violated for beta_{}: {mse} vs {decomposed}",
            j + 1
        );

        rows.push(MetricsRow {
            name: format!("beta_{}", j + 1),
            truth,
            bias,
            sd: var.sqrt(),
            mse,
            cr,
        });
    }
    Ok(SimMetrics { rows, n_used: used.len(), n_failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::digamma;

    #[test]
    fn design_validates() {
        assert!(SimDesign::new(100, 0.5).validate().is_ok());
        assert!(SimDesign::new(0, 0.5).validate().is_err());
        assert!(SimDesign::new(10, 0.0).validate().is_err());
        let mut d = SimDesign::new(10, 0.5);
        d.n_burn = d.n_iter;
        assert!(d.validate().is_err());
        let mut d = SimDesign::new(10, 0.5);
        d.beta_true = DVector::zeros(0);
        assert!(d.validate().is_err());
    }

    #[test]
    fn single_site_mlg_field_has_digamma_mean() {
        // n=1, sigma_w=1, alpha=kappa=1: W is a standard log-gamma draw
        // with mean psi(1).
        let mut d = SimDesign::new(1, 1.0);
        d.beta_true = DVector::from_row_slice(&[0.0]);
        let mut rng = rng_from_seed(660);
        let reps = 100_000;
        let mut sum = 0.0;
        for _ in 0..reps {
            let (_, truth) = generate_dataset(&d, &mut rng).unwrap();
            sum += truth.w[0];
        }
        let mean = sum / reps as f64;
        // Var of log-gamma(1,1) is trigamma(1) = pi^2/6.
        let se = (std::f64::consts::PI.powi(2) / 6.0 / reps as f64).sqrt();
        assert!(
            (mean - digamma(1.0)).abs() < 3.0 * se,
            "mean {mean} vs psi(1) = {}",
            digamma(1.0)
        );
    }

    #[test]
    fn single_site_gaussian_field_is_standard_normal() {
        let mut d = SimDesign::new(1, 1.0);
        d.beta_true = DVector::from_row_slice(&[0.0]);
        d.w_law = LatentLaw::Gaussian;
        let mut rng = rng_from_seed(661);
        let reps = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let (_, truth) = generate_dataset(&d, &mut rng).unwrap();
            sum += truth.w[0];
            sumsq += truth.w[0] * truth.w[0];
        }
        let mean = sum / reps as f64;
        let var = sumsq / reps as f64 - mean * mean;
        assert!(mean.abs() < 3.0 / (reps as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (2.0 / reps as f64).sqrt(), "var {var}");
    }

    #[test]
    fn zero_signal_losses_are_standard_exponential() {
        // beta = 0 and a vanishing spatial scale: Z is iid exponential(1)
        // when k = 1. Averaged over replicates to keep each covariance
        // factorization small.
        let mut d = SimDesign::new(500, 1.0);
        d.beta_true = DVector::from_row_slice(&[0.0]);
        d.w_law = LatentLaw::Gaussian;
        d.sigma_w_true = 1e-150;
        let mut rng = rng_from_seed(662);
        let mut sum = 0.0;
        let reps = 20;
        for _ in 0..reps {
            let (data, truth) = generate_dataset(&d, &mut rng).unwrap();
            assert!(truth.w.amax() < 1e-100);
            sum += data.z().iter().sum::<f64>() / data.n() as f64;
        }
        let mean = sum / reps as f64;
        // 10^4 effective draws: SE = 0.01.
        assert!((mean - 1.0).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn generated_dataset_matches_design_dimensions() {
        let d = SimDesign::new(25, 0.5);
        let mut rng = rng_from_seed(663);
        let (data, truth) = generate_dataset(&d, &mut rng).unwrap();
        assert_eq!(data.n(), 25);
        assert_eq!(data.p(), 3);
        assert_eq!(truth.beta, d.beta_true);
        assert_eq!(truth.phi, 5.0);
        assert_relative_eq!(truth.log_sigma_w, 0.0);
        assert!(data.z().iter().all(|z| *z > 0.0));
        for c in data.locs().coords() {
            assert!(c[0] >= 0.0 && c[0] < 3.0 && c[1] >= 0.0 && c[1] < 3.0);
        }
    }

    #[test]
    fn mocked_perfect_fitter_gives_zero_error_and_full_coverage() {
        let mut d = SimDesign::new(5, 0.5);
        d.n_replicates = 8;
        d.n_iter = 10;
        d.n_burn = 0;
        let metrics = run_study_with(&d, |_, truth, _| {
            Ok(RepEstimate {
                mean: truth.beta.clone(),
                intervals: truth.beta.iter().map(|b| (b - 0.1, b + 0.1)).collect(),
            })
        })
        .unwrap();
        assert_eq!(metrics.n_used, 8);
        assert_eq!(metrics.n_failed, 0);
        for row in &metrics.rows {
            assert_relative_eq!(row.bias, 0.0);
            assert_relative_eq!(row.sd, 0.0);
            assert_relative_eq!(row.mse, 0.0);
            assert_relative_eq!(row.cr, 1.0);
        }
    }

    #[test]
    fn failed_replicates_are_excluded_and_counted() {
        let mut d = SimDesign::new(5, 0.5);
        d.n_replicates = 6;
        let metrics = run_study_with(&d, |_, truth, seed| {
            if seed % 2 == 0 {
                Err(Error::Numerical("synthetic failure".into()))
            } else {
                Ok(RepEstimate {
                    mean: truth.beta.clone(),
                    intervals: truth.beta.iter().map(|b| (b - 0.1, b + 0.1)).collect(),
                })
            }
        })
        .unwrap();
        assert_eq!(metrics.n_used + metrics.n_failed, 6);
        assert!(metrics.n_failed > 0, "expected some synthetic failures");
        for row in &metrics.rows {
            assert_relative_eq!(row.cr, 1.0);
        }
    }

    #[test]
    fn real_study_is_deterministic() {
        let mut d = SimDesign::new(8, 0.5);
        d.n_replicates = 2;
        d.n_iter = 40;
        d.n_burn = 10;
        d.seed = 31;
        let a = run_study(&d).unwrap();
        let b = run_study(&d).unwrap();
        assert_eq!(a.n_used, b.n_used);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.bias, rb.bias);
            assert_eq!(ra.sd, rb.sd);
            assert_eq!(ra.mse, rb.mse);
            assert_eq!(ra.cr, rb.cr);
        }
    }
}
