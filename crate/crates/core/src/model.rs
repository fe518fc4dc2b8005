//! The hierarchical spatial Weibull model and its Gibbs sampler.
//!
//! Observations `Z_i > 0` at locations `s_i` follow
//! `Z_i ~ Weibull(k, b_i)` in the rate-like parameterization
//! (`log f = log k + log b + (k−1) log z − z^k b`) with
//! `b_i = exp{x_i'β + w_i}`. The coefficient vector carries an MLG prior
//! `β ~ MLG(0, σ I_p, α_β 1, κ_β 1)` and the latent field
//! `W ~ MLG(0, σ_w L_φ, α_W 1, κ_W 1)` where `L_φ` is the lower Cholesky
//! factor of the exponential covariogram with range `φ`. The scales get
//! `log σ, log σ_w ~ N(0,1)` priors and `φ` a discrete-uniform prior over a
//! user grid.
//!
//! Conjugacy does the heavy lifting: the full conditionals of `β` and `W`
//! are conditional-MLG kernels ([`beta_full_conditional`],
//! [`w_full_conditional`]) sampled exactly through [`crate::mlg::cmlg_sample`].
//! `log σ` and `log σ_w` move by Gaussian random-walk Metropolis
//! ([`update_hyper_mh`]) and `φ` by exact discrete Gibbs over its grid
//! ([`update_phi`]). [`run_chain`] wires the five updates into a
//! deterministic-scan sweep with a fixed, documented order.
//!
//! The Weibull shape `k` is *not* sampled: it is fixed per chain and chosen
//! across chains by predictive score (see [`crate::diagnostics::lpml_grid`]).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mlg::{cmlg_sample, CMLGParams};
use crate::rng::rng_from_seed;
use crate::spatial::{
    distance_matrix, exp_covariogram, lower_triangular_inverse, matrix_sqrt, LocationSet,
};

/// `ln(1e300)`: data rates are clipped here (with a logged warning) instead
/// of overflowing to infinity.
const LN_RATE_MAX: f64 = 690.775_527_898_213_7;

/// A regression dataset: locations, covariates, and positive losses.
///
/// The covariate matrix is taken as given — include a column of ones
/// yourself if the model should have an intercept.
#[derive(Clone, Debug)]
pub struct Dataset {
    locs: LocationSet,
    x: DMatrix<f64>,
    z: DVector<f64>,
}

impl Dataset {
    /// Validate that dimensions agree, `X` is finite, and every `Z_i > 0`.
    pub fn new(locs: LocationSet, x: DMatrix<f64>, z: DVector<f64>) -> Result<Self> {
        let n = locs.n();
        if x.nrows() != n || z.len() != n {
            return Err(Error::invalid(format!(
                "dataset dimension mismatch: {n} locations, X is {}x{}, Z has length {}",
                x.nrows(),
                x.ncols(),
                z.len()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::invalid("covariate matrix must have at least one column"));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("covariate matrix must be finite"));
        }
        for i in 0..n {
            if !(z[i] > 0.0) || !z[i].is_finite() {
                return Err(Error::invalid(format!(
                    "losses must be positive and finite; Z[{i}] = {}",
                    z[i]
                )));
            }
        }
        Ok(Self { locs, x, z })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.locs.n()
    }

    /// Number of covariates (columns of X).
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Observation locations.
    pub fn locs(&self) -> &LocationSet {
        &self.locs
    }

    /// Covariate matrix (n × p).
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Loss vector (length n, all positive).
    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }
}

/// Fixed hyperparameters of one chain.
///
/// `kappa_beta` and `kappa_w` use the *scale* convention of the MLG priors.
/// The defaults follow the fitting protocol this crate ships with: a large
/// `alpha_beta` with `kappa_beta = 1/alpha_beta` makes the β prior an
/// approximate `N(0, σ²I)`, and `alpha_w = kappa_w = 1` keeps the spatial
/// prior a genuine log-gamma field.
#[derive(Clone, Debug)]
pub struct Hyperparams {
    /// Weibull shape, fixed for the whole chain.
    pub k: f64,
    /// Shape of the β prior coordinates.
    pub alpha_beta: f64,
    /// Scale of the β prior coordinates.
    pub kappa_beta: f64,
    /// Shape of the W prior coordinates.
    pub alpha_w: f64,
    /// Scale of the W prior coordinates.
    pub kappa_w: f64,
    /// Support of the discrete-uniform prior on the spatial range φ;
    /// strictly increasing, all positive.
    pub phi_grid: Vec<f64>,
    /// Random-walk step for the log σ update.
    pub mh_step_sigma: f64,
    /// Random-walk step for the log σ_w update.
    pub mh_step_sigma_w: f64,
}

impl Hyperparams {
    /// Defaults for a given Weibull shape: `alpha_beta = 1e4`,
    /// `kappa_beta = 1e-4`, `alpha_w = kappa_w = 1`, φ grid `{1, …, 10}`,
    /// both MH steps `0.3`.
    pub fn new(k: f64) -> Self {
        Self {
            k,
            alpha_beta: 1e4,
            kappa_beta: 1e-4,
            alpha_w: 1.0,
            kappa_w: 1.0,
            phi_grid: (1..=10).map(f64::from).collect(),
            mh_step_sigma: 0.3,
            mh_step_sigma_w: 0.3,
        }
    }

    /// Check every invariant: positive finite scalars, a nonempty strictly
    /// increasing positive φ grid, positive MH steps.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k", self.k),
            ("alpha_beta", self.alpha_beta),
            ("kappa_beta", self.kappa_beta),
            ("alpha_w", self.alpha_w),
            ("kappa_w", self.kappa_w),
            ("mh_step_sigma", self.mh_step_sigma),
            ("mh_step_sigma_w", self.mh_step_sigma_w),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.phi_grid.is_empty() {
            return Err(Error::invalid("phi_grid must be nonempty"));
        }
        for (i, &g) in self.phi_grid.iter().enumerate() {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::invalid(format!("phi_grid[{i}] must be positive, got {g}")));
            }
            if i > 0 && g <= self.phi_grid[i - 1] {
                return Err(Error::invalid("phi_grid must be strictly increasing"));
            }
        }
        Ok(())
    }
}

/// One state of the Gibbs sampler.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    /// Regression coefficients (length p).
    pub beta: DVector<f64>,
    /// Latent spatial effects (length n).
    pub w: DVector<f64>,
    /// Log of the β prior scale σ.
    pub log_sigma: f64,
    /// Log of the spatial scale σ_w.
    pub log_sigma_w: f64,
    /// Spatial range; always one of the grid values.
    pub phi: f64,
}

impl ChainState {
    fn all_finite(&self) -> bool {
        self.beta.iter().all(|v| v.is_finite())
            && self.w.iter().all(|v| v.is_finite())
            && self.log_sigma.is_finite()
            && self.log_sigma_w.is_finite()
            && self.phi.is_finite()
    }
}

/// Which scalar hyperparameter an MH update targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperBlock {
    /// The β prior scale, on the log scale.
    LogSigma,
    /// The spatial scale, on the log scale.
    LogSigmaW,
}

/// Metadata describing how a set of posterior draws was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMeta {
    /// Total Gibbs sweeps.
    pub n_iter: usize,
    /// Sweeps discarded as burn-in.
    pub n_burn: usize,
    /// Master seed of the chain.
    pub seed: u64,
    /// Weibull shape the chain was run at.
    pub k: f64,
    /// Post-burn-in acceptance rate of the log σ update.
    pub acc_log_sigma: f64,
    /// Post-burn-in acceptance rate of the log σ_w update.
    pub acc_log_sigma_w: f64,
}

/// Stored post-burn-in draws, one row per sweep.
///
/// Column layout: `β_1..β_p`, `w_1..w_n`, `log σ`, `log σ_w`, `φ` —
/// `p + n + 3` columns in total, mirrored by [`PosteriorDraws::labels`].
#[derive(Clone, Debug)]
pub struct PosteriorDraws {
    draws: DMatrix<f64>,
    p: usize,
    n: usize,
    meta: ChainMeta,
}

impl PosteriorDraws {
    /// Wrap a draw matrix, checking the column count is `p + n + 3`, at
    /// least one draw is present, and the acceptance rates are in [0, 1].
    pub fn new(draws: DMatrix<f64>, p: usize, n: usize, meta: ChainMeta) -> Result<Self> {
        if draws.nrows() == 0 {
            return Err(Error::invalid("posterior draws must contain at least one row"));
        }
        if draws.ncols() != p + n + 3 {
            return Err(Error::invalid(format!(
                "posterior draws must have p + n + 3 = {} columns, got {}",
                p + n + 3,
                draws.ncols()
            )));
        }
        for (name, r) in [
            ("log sigma", meta.acc_log_sigma),
            ("log sigma_w", meta.acc_log_sigma_w),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!("{name} acceptance rate {r} outside [0, 1]")));
            }
        }
        Ok(Self { draws, p, n, meta })
    }

    /// Number of stored draws B.
    pub fn n_draws(&self) -> usize {
        self.draws.nrows()
    }

    /// Number of regression coefficients.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of spatial effects.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The raw B × (p+n+3) draw matrix.
    pub fn draws(&self) -> &DMatrix<f64> {
        &self.draws
    }

    /// Chain metadata.
    pub fn meta(&self) -> &ChainMeta {
        &self.meta
    }

    /// Column labels in storage order:
    /// `beta_1..beta_p, w_1..w_n, log_sigma, log_sigma_w, phi`.
    pub fn labels(&self) -> Vec<String> {
        let mut l = Vec::with_capacity(self.p + self.n + 3);
        for j in 1..=self.p {
            l.push(format!("beta_{j}"));
        }
        for i in 1..=self.n {
            l.push(format!("w_{i}"));
        }
        l.push("log_sigma".into());
        l.push("log_sigma_w".into());
        l.push("phi".into());
        l
    }

    /// β part of draw `b`.
    pub fn beta(&self, b: usize) -> DVector<f64> {
        DVector::from_fn(self.p, |j, _| self.draws[(b, j)])
    }

    /// W part of draw `b`.
    pub fn w(&self, b: usize) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.draws[(b, self.p + i)])
    }

    /// log σ of draw `b`.
    pub fn log_sigma(&self, b: usize) -> f64 {
        self.draws[(b, self.p + self.n)]
    }

    /// log σ_w of draw `b`.
    pub fn log_sigma_w(&self, b: usize) -> f64 {
        self.draws[(b, self.p + self.n + 1)]
    }

    /// φ of draw `b`.
    pub fn phi(&self, b: usize) -> f64 {
        self.draws[(b, self.p + self.n + 2)]
    }

    /// One full column as a slice-backed vector (for summaries).
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_draws()).map(|b| self.draws[(b, c)]).collect()
    }

    /// Posterior mean of each W coordinate.
    pub fn w_mean(&self) -> DVector<f64> {
        let b = self.n_draws() as f64;
        let mut m = DVector::zeros(self.n);
        for r in 0..self.n_draws() {
            for i in 0..self.n {
                m[i] += self.draws[(r, self.p + i)];
            }
        }
        m / b
    }

    /// Posterior mean of β.
    pub fn beta_mean(&self) -> DVector<f64> {
        let b = self.n_draws() as f64;
        let mut m = DVector::zeros(self.p);
        for r in 0..self.n_draws() {
            for j in 0..self.p {
                m[j] += self.draws[(r, j)];
            }
        }
        m / b
    }
}

/// Log density of `Weibull(k, b)` at `z`:
/// `log k + log b + (k−1) log z − z^k b`.
pub fn weibull_log_pdf(z: f64, k: f64, b: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid(format!("weibull_log_pdf requires z > 0, got {z}")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!("weibull_log_pdf requires k > 0, got {k}")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid(format!("weibull_log_pdf requires b > 0, got {b}")));
    }
    Ok(k.ln() + b.ln() + (k - 1.0) * z.ln() - z.powf(k) * b)
}

/// Deterministic inverse-CDF map of `Weibull(k, b)`: the draw corresponding
/// to uniform variate `u ∈ (0, 1)` is `(−log u / b)^{1/k}`.
pub fn weibull_from_uniform(k: f64, b: f64, u: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() || !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid(format!(
            "weibull_from_uniform requires k > 0 and b > 0, got k = {k}, b = {b}"
        )));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid(format!("uniform variate must lie in (0, 1), got {u}")));
    }
    Ok((-u.ln() / b).powf(1.0 / k))
}

/// Draw from `Weibull(k, b)` by inverse CDF; exact and strictly positive.
pub fn weibull_sample<R: Rng + ?Sized>(k: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() || !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid(format!(
            "weibull_sample requires k > 0 and b > 0, got k = {k}, b = {b}"
        )));
    }
    // rng.random::<f64>() lands in [0, 1); reject exact zeros so the draw
    // stays positive and finite.
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    Ok((-u.ln() / b).powf(1.0 / k))
}

/// Exponentiate rate exponents with the `1e300` clip signalled to caller.
fn clipped_rates(exponents: impl Iterator<Item = f64>) -> (Vec<f64>, usize) {
    let mut clipped = 0usize;
    let rates = exponents
        .map(|e| {
            if e > LN_RATE_MAX {
                clipped += 1;
                LN_RATE_MAX.exp()
            } else {
                e.exp()
            }
        })
        .collect();
    (rates, clipped)
}

fn warn_clipped(block: &str, clipped: usize) {
    if clipped > 0 {
        log::warn!("{block}: {clipped} data rate(s) exceeded 1e300 and were clipped");
    }
}

/// Full conditional of β as a conditional-MLG kernel.
///
/// Design: `H = [X; (1/(σ√α_β)) I_p]`, shapes `[1_n; α_β 1_p]`, rates
/// `[Z_i^k e^{w_i}; (1/κ_β) 1_p]` with σ = `exp(state.log_sigma)`. The
/// `√α_β` factor in the prior block makes the β prior the member of the
/// MLG family that approximates `N(0, σ²I_p)` when `α_β` is large and
/// `κ_β = 1/α_β` — so σ keeps its meaning as the prior scale of the
/// coefficients themselves. Data rates are computed in log space and
/// clipped at `1e300` with a warning.
pub fn beta_full_conditional(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
) -> Result<CMLGParams> {
    hyper.validate()?;
    check_state_dims(state, data)?;
    let k_ln_z = data.z.map(|z| hyper.k * z.ln());
    let (params, clipped) = build_beta_fc(state, data, hyper, &k_ln_z)?;
    warn_clipped("beta full conditional", clipped);
    Ok(params)
}

fn build_beta_fc(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
    k_ln_z: &DVector<f64>,
) -> Result<(CMLGParams, usize)> {
    let (n, p) = (data.n(), data.p());
    let sigma = state.log_sigma.exp();
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Numerical(format!(
            "beta prior scale exp({}) is not a positive finite number",
            state.log_sigma
        )));
    }
    let prior_scale = sigma * hyper.alpha_beta.sqrt();
    let mut h = DMatrix::zeros(n + p, p);
    h.view_mut((0, 0), (n, p)).copy_from(&data.x);
    for j in 0..p {
        h[(n + j, j)] = 1.0 / prior_scale;
    }
    let mut alpha = DVector::from_element(n + p, 1.0);
    for j in 0..p {
        alpha[n + j] = hyper.alpha_beta;
    }
    let (data_rates, clipped) = clipped_rates((0..n).map(|i| k_ln_z[i] + state.w[i]));
    let mut rate = DVector::from_element(n + p, 1.0 / hyper.kappa_beta);
    for i in 0..n {
        rate[i] = data_rates[i];
    }
    // The stacked (1/σ)I block makes H full column rank by construction.
    Ok((CMLGParams::new_unchecked(h, alpha, rate)?, clipped))
}

/// Full conditional of W as a conditional-MLG kernel.
///
/// Design: `H = [I_n; Σ_W^{−1/2}]` where `Σ_W^{1/2} = σ_w L_φ` is the lower
/// Cholesky factor of `σ_w² · exp(−dist/φ)`; shapes `[1_n; α_W 1_n]`; rates
/// `[Z_i^k e^{x_i'β}; (1/κ_W) 1_n]`. Covariance factorization failures
/// surface as the spatial module's errors.
pub fn w_full_conditional(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
) -> Result<CMLGParams> {
    hyper.validate()?;
    check_state_dims(state, data)?;
    let dist = distance_matrix(data.locs());
    let corr = exp_covariogram(&dist, state.phi, 1.0)?;
    let l = matrix_sqrt(&corr)?;
    let inv_l = lower_triangular_inverse(&l)?;
    let k_ln_z = data.z.map(|z| hyper.k * z.ln());
    let (params, clipped) = build_w_fc(state, data, hyper, &inv_l, &k_ln_z)?;
    warn_clipped("w full conditional", clipped);
    Ok(params)
}

fn build_w_fc(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
    inv_l: &DMatrix<f64>,
    k_ln_z: &DVector<f64>,
) -> Result<(CMLGParams, usize)> {
    let n = data.n();
    let sigma_w = state.log_sigma_w.exp();
    if !(sigma_w > 0.0) || !sigma_w.is_finite() {
        return Err(Error::Numerical(format!(
            "spatial scale exp({}) is not a positive finite number",
            state.log_sigma_w
        )));
    }
    let mut h = DMatrix::zeros(2 * n, n);
    for i in 0..n {
        h[(i, i)] = 1.0;
    }
    for c in 0..n {
        for r in c..n {
            h[(n + r, c)] = inv_l[(r, c)] / sigma_w;
        }
    }
    let mut alpha = DVector::from_element(2 * n, 1.0);
    for i in 0..n {
        alpha[n + i] = hyper.alpha_w;
    }
    let xb = &data.x * &state.beta;
    let (data_rates, clipped) = clipped_rates((0..n).map(|i| k_ln_z[i] + xb[i]));
    let mut rate = DVector::from_element(2 * n, 1.0 / hyper.kappa_w);
    for i in 0..n {
        rate[i] = data_rates[i];
    }
    // The stacked triangular block has positive diagonal, so H has full
    // column rank by construction.
    Ok((CMLGParams::new_unchecked(h, alpha, rate)?, clipped))
}

fn check_state_dims(state: &ChainState, data: &Dataset) -> Result<()> {
    if state.beta.len() != data.p() || state.w.len() != data.n() {
        return Err(Error::invalid(format!(
            "state dimension mismatch: beta {} (want {}), w {} (want {})",
            state.beta.len(),
            data.p(),
            state.w.len(),
            data.n()
        )));
    }
    if !state.all_finite() {
        return Err(Error::invalid("chain state must be finite"));
    }
    Ok(())
}

/// Unnormalized log target of the log σ update: the MLG prior log density
/// of β viewed as a function of σ plus the standard-normal prior of log σ,
/// dropping terms constant in log σ. The prior map is `(σ√α_β) I_p`, so
/// the transformed coordinates are `β_j / (σ√α_β)`.
fn log_sigma_target(beta: &DVector<f64>, hyper: &Hyperparams, log_sigma: f64) -> f64 {
    let scale = log_sigma.exp() * hyper.alpha_beta.sqrt();
    let p = beta.len() as f64;
    let mut t = -p * log_sigma - 0.5 * log_sigma * log_sigma;
    for &b in beta.iter() {
        let g = b / scale;
        t += hyper.alpha_beta * g - g.exp() / hyper.kappa_beta;
    }
    t
}

/// Unnormalized log target of the log σ_w update given `u = L_φ⁻¹ W`
/// (which does not depend on σ_w).
fn log_sigma_w_target(u: &DVector<f64>, hyper: &Hyperparams, log_sigma_w: f64) -> f64 {
    let sigma_w = log_sigma_w.exp();
    let n = u.len() as f64;
    let mut t = -n * log_sigma_w - 0.5 * log_sigma_w * log_sigma_w;
    for &ui in u.iter() {
        let g = ui / sigma_w;
        t += hyper.alpha_w * g - g.exp() / hyper.kappa_w;
    }
    t
}

/// One random-walk Metropolis update of `log σ` or `log σ_w`.
///
/// The proposal is Gaussian with the step configured in `hyper`; the target
/// is the matching MLG prior density (of β for σ, of W for σ_w) times the
/// standard-normal prior of the log scale. Returns the new state and
/// whether the proposal was accepted.
pub fn update_hyper_mh<R: Rng + ?Sized>(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
    which: HyperBlock,
    rng: &mut R,
) -> Result<(ChainState, bool)> {
    hyper.validate()?;
    check_state_dims(state, data)?;
    let step = match which {
        HyperBlock::LogSigma => hyper.mh_step_sigma,
        HyperBlock::LogSigmaW => hyper.mh_step_sigma_w,
    };
    let mut new_state = state.clone();
    let accepted = match which {
        HyperBlock::LogSigma => {
            let cur = state.log_sigma;
            let prop = cur + step * rng.sample::<f64, _>(StandardNormal);
            let delta =
                log_sigma_target(&state.beta, hyper, prop) - log_sigma_target(&state.beta, hyper, cur);
            if accept(delta, rng) {
                new_state.log_sigma = prop;
                true
            } else {
                false
            }
        }
        HyperBlock::LogSigmaW => {
            let dist = distance_matrix(data.locs());
            let corr = exp_covariogram(&dist, state.phi, 1.0)?;
            let l = matrix_sqrt(&corr)?;
            let inv_l = lower_triangular_inverse(&l)?;
            let u = &inv_l * &state.w;
            let cur = state.log_sigma_w;
            let prop = cur + step * rng.sample::<f64, _>(StandardNormal);
            let delta = log_sigma_w_target(&u, hyper, prop) - log_sigma_w_target(&u, hyper, cur);
            if accept(delta, rng) {
                new_state.log_sigma_w = prop;
                true
            } else {
                false
            }
        }
    };
    Ok((new_state, accepted))
}

fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// Log weights (up to a shared constant) of each φ grid value given the
/// current W and σ_w: the MLG log density of W under each grid covariogram
/// plus the flat grid prior. A grid point whose covariogram fails to factor
/// gets weight −∞ and a logged warning.
pub(crate) fn phi_log_weights(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
) -> Result<Vec<f64>> {
    let dist = distance_matrix(data.locs());
    let sigma_w = state.log_sigma_w.exp();
    let mut weights = Vec::with_capacity(hyper.phi_grid.len());
    for &phi in &hyper.phi_grid {
        let factor = exp_covariogram(&dist, phi, 1.0)
            .and_then(|c| matrix_sqrt(&c))
            .and_then(|l| {
                let inv = lower_triangular_inverse(&l)?;
                let logdet: f64 = (0..l.nrows()).map(|i| l[(i, i)].ln()).sum();
                Ok((inv, logdet))
            });
        match factor {
            Ok((inv_l, logdet)) => {
                let u = &inv_l * &state.w;
                weights.push(phi_weight_from_parts(&u, logdet, sigma_w, hyper));
            }
            Err(e) => {
                log::warn!("phi = {phi}: covariogram factorization failed ({e}); excluded");
                weights.push(f64::NEG_INFINITY);
            }
        }
    }
    Ok(weights)
}

/// MLG log density terms of W that vary across the φ grid, given
/// `u = L_φ⁻¹ W` and `log|det L_φ|`.
fn phi_weight_from_parts(u: &DVector<f64>, logdet_l: f64, sigma_w: f64, hyper: &Hyperparams) -> f64 {
    let mut t = -logdet_l;
    for &ui in u.iter() {
        let g = ui / sigma_w;
        t += hyper.alpha_w * g - g.exp() / hyper.kappa_w;
    }
    t
}

/// Exact discrete Gibbs update of the spatial range φ: compute the
/// posterior weight of every grid value and sample categorically.
pub fn update_phi<R: Rng + ?Sized>(
    state: &ChainState,
    data: &Dataset,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<ChainState> {
    hyper.validate()?;
    check_state_dims(state, data)?;
    let weights = phi_log_weights(state, data, hyper)?;
    let idx = sample_categorical_log(&weights, rng)?;
    let mut new_state = state.clone();
    new_state.phi = hyper.phi_grid[idx];
    Ok(new_state)
}

/// Sample an index proportionally to `exp(log_weights)`, stably.
fn sample_categorical_log<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Result<usize> {
    let mx = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY || mx.is_nan() {
        return Err(Error::Numerical(
            "no phi grid value has positive posterior weight".into(),
        ));
    }
    let probs: Vec<f64> = log_weights.iter().map(|w| (w - mx).exp()).collect();
    let total: f64 = probs.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return Ok(i);
        }
    }
    Ok(probs.len() - 1)
}

/// The default chain initialization: β = 0, W = 0, log σ = 0, log σ_w = 0,
/// φ at the (lower) median grid value.
pub fn default_init(data: &Dataset, hyper: &Hyperparams) -> ChainState {
    ChainState {
        beta: DVector::zeros(data.p()),
        w: DVector::zeros(data.n()),
        log_sigma: 0.0,
        log_sigma_w: 0.0,
        phi: hyper.phi_grid[(hyper.phi_grid.len() - 1) / 2],
    }
}

/// Per-grid-value covariogram factors, computed once per chain: the grid
/// does not depend on the chain state (σ_w enters all formulas analytically,
/// as a rescaling of `L⁻¹W`), so factoring each grid covariogram once is
/// exactly equivalent to refactoring every sweep.
struct PhiCache {
    inv_l: Vec<DMatrix<f64>>,
    logdet_l: Vec<f64>,
}

impl PhiCache {
    fn build(dist: &DMatrix<f64>, grid: &[f64]) -> Result<Self> {
        let mut inv_l = Vec::with_capacity(grid.len());
        let mut logdet_l = Vec::with_capacity(grid.len());
        for &phi in grid {
            let c = exp_covariogram(dist, phi, 1.0)?;
            let l = matrix_sqrt(&c)?;
            let inv = lower_triangular_inverse(&l)?;
            logdet_l.push((0..l.nrows()).map(|i| l[(i, i)].ln()).sum());
            inv_l.push(inv);
        }
        Ok(Self { inv_l, logdet_l })
    }
}

/// Run one Gibbs chain with the default initialization. See
/// [`run_chain_with_init`] for the sweep definition and storage contract.
pub fn run_chain(
    data: &Dataset,
    hyper: &Hyperparams,
    n_iter: usize,
    n_burn: usize,
    seed: u64,
) -> Result<PosteriorDraws> {
    let init = default_init(data, hyper);
    run_chain_with_init(data, hyper, &init, n_iter, n_burn, seed)
}

/// Run one Gibbs chain from an explicit starting state.
///
/// Each sweep updates, in this fixed order: β (conditional-MLG draw), W
/// (conditional-MLG draw), log σ (MH), log σ_w (MH), φ (discrete Gibbs).
/// States after sweeps `n_burn+1 ..= n_iter` are stored, so `n_iter − n_burn`
/// draws come back. The MH steps adapt every 50 sweeps during burn-in
/// (shrinking below 30% acceptance, growing above 45%) and are frozen
/// afterwards so the post-burn-in kernel is exactly invariant.
///
/// The run is a pure function of `(data, hyper, init, n_iter, n_burn, seed)`.
/// A non-finite state aborts with the sweep index in the error.
pub fn run_chain_with_init(
    data: &Dataset,
    hyper: &Hyperparams,
    init: &ChainState,
    n_iter: usize,
    n_burn: usize,
    seed: u64,
) -> Result<PosteriorDraws> {
    hyper.validate()?;
    check_state_dims(init, data)?;
    if n_iter == 0 || n_iter <= n_burn {
        return Err(Error::invalid(format!(
            "need n_iter > n_burn >= 0, got n_iter = {n_iter}, n_burn = {n_burn}"
        )));
    }
    let mut phi_idx = hyper
        .phi_grid
        .iter()
        .position(|&g| g == init.phi)
        .ok_or_else(|| Error::invalid(format!("initial phi {} is not a grid value", init.phi)))?;

    let (n, p) = (data.n(), data.p());
    let dist = distance_matrix(data.locs());
    let cache = PhiCache::build(&dist, &hyper.phi_grid)?;
    let k_ln_z = data.z.map(|z| hyper.k * z.ln());

    let mut rng = rng_from_seed(seed);
    let mut state = init.clone();
    state.phi = hyper.phi_grid[phi_idx];

    let mut step_s = hyper.mh_step_sigma;
    let mut step_sw = hyper.mh_step_sigma_w;
    let mut local = hyper.clone();

    let b_total = n_iter - n_burn;
    let mut draws = DMatrix::zeros(b_total, p + n + 3);
    let (mut acc_s, mut acc_sw) = (0usize, 0usize);
    let (mut win_acc_s, mut win_acc_sw, mut win_n) = (0usize, 0usize, 0usize);
    let mut clipped_total = 0usize;

    for it in 0..n_iter {
        // beta block.
        let (beta_fc, c1) = build_beta_fc(&state, data, hyper, &k_ln_z)?;
        state.beta = cmlg_sample(&beta_fc, &state.beta, &mut rng)?;

        // W block.
        let (w_fc, c2) = build_w_fc(&state, data, hyper, &cache.inv_l[phi_idx], &k_ln_z)?;
        state.w = cmlg_sample(&w_fc, &state.w, &mut rng)?;
        clipped_total += c1 + c2;

        // log sigma (MH with the possibly adapted step).
        local.mh_step_sigma = step_s;
        {
            let cur = state.log_sigma;
            let prop = cur + step_s * rng.sample::<f64, _>(StandardNormal);
            let delta = log_sigma_target(&state.beta, hyper, prop)
                - log_sigma_target(&state.beta, hyper, cur);
            if accept(delta, &mut rng) {
                state.log_sigma = prop;
                if it >= n_burn {
                    acc_s += 1;
                } else {
                    win_acc_s += 1;
                }
            }
        }

        // log sigma_w (MH); u = L^-1 W is sigma_w-free and reused by the
        // phi update below only through its own per-grid solves.
        {
            let u = &cache.inv_l[phi_idx] * &state.w;
            let cur = state.log_sigma_w;
            let prop = cur + step_sw * rng.sample::<f64, _>(StandardNormal);
            let delta = log_sigma_w_target(&u, hyper, prop) - log_sigma_w_target(&u, hyper, cur);
            if accept(delta, &mut rng) {
                state.log_sigma_w = prop;
                if it >= n_burn {
                    acc_sw += 1;
                } else {
                    win_acc_sw += 1;
                }
            }
        }

        // phi (exact discrete Gibbs over the cached grid factors).
        {
            let sigma_w = state.log_sigma_w.exp();
            let mut weights = Vec::with_capacity(hyper.phi_grid.len());
            for g in 0..hyper.phi_grid.len() {
                let u = &cache.inv_l[g] * &state.w;
                weights.push(phi_weight_from_parts(&u, cache.logdet_l[g], sigma_w, hyper));
            }
            phi_idx = sample_categorical_log(&weights, &mut rng)?;
            state.phi = hyper.phi_grid[phi_idx];
        }

        if !state.all_finite() {
            return Err(Error::Numerical(format!(
                "chain state became non-finite at sweep {it}"
            )));
        }

        // Step adaptation, burn-in only, every 50 sweeps.
        if it < n_burn {
            win_n += 1;
            if win_n == 50 {
                step_s = adapt_step(step_s, win_acc_s, win_n);
                step_sw = adapt_step(step_sw, win_acc_sw, win_n);
                win_acc_s = 0;
                win_acc_sw = 0;
                win_n = 0;
            }
        } else {
            let row = it - n_burn;
            for j in 0..p {
                draws[(row, j)] = state.beta[j];
            }
            for i in 0..n {
                draws[(row, p + i)] = state.w[i];
            }
            draws[(row, p + n)] = state.log_sigma;
            draws[(row, p + n + 1)] = state.log_sigma_w;
            draws[(row, p + n + 2)] = state.phi;
        }
    }

    if clipped_total > 0 {
        log::warn!("run_chain: {clipped_total} data rate(s) clipped at 1e300 across the run");
    }

    let b = b_total as f64;
    let meta = ChainMeta {
        n_iter,
        n_burn,
        seed,
        k: hyper.k,
        acc_log_sigma: acc_s as f64 / b,
        acc_log_sigma_w: acc_sw as f64 / b,
    };
    PosteriorDraws::new(draws, p, n, meta)
}

fn adapt_step(step: f64, accepted: usize, window: usize) -> f64 {
    let rate = accepted as f64 / window as f64;
    let adjusted = if rate < 0.30 {
        step * 0.7
    } else if rate > 0.45 {
        step * 1.4
    } else {
        step
    };
    adjusted.clamp(1e-3, 10.0)
}
