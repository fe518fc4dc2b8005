//! C ABI for the spatweib library.
//!
//! Every entry point is panic-safe (panics become [`SwStatus::Panic`]
//! instead of unwinding across the boundary), returns an [`SwStatus`] code,
//! and records a human-readable diagnostic retrievable through
//! [`sw_last_error_message`] on failure. Datasets and posterior draws are
//! opaque handles created and destroyed by this library; everything else
//! crosses the boundary as plain C scalars and caller-owned arrays.
//!
//! The draw matrix layout is row-major conceptually: `sw_draws_rows` stored
//! sweeps by `sw_draws_cols` columns ordered as the p regression
//! coefficients, the n latent site effects, then `log sigma`,
//! `log sigma_w`, and `phi`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::{c_char, c_int};

use spatweib::cli::{ingest, load_draws, write_draws};
use spatweib::diagnostics::lpml_grid;
use spatweib::model::{run_chain, Dataset, Hyperparams, PosteriorDraws};
use spatweib::risk::{compute_risk_report, PredictiveQuery};
use spatweib::rng::rng_from_seed;
use spatweib::spatial::{CoordMode, LocationSet};
use spatweib::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwStatus {
    /// Success.
    Ok = 0,
    /// Invalid argument or configuration.
    InvalidArgument = 2,
    /// Input data could not be parsed.
    IngestError = 3,
    /// Numerical failure (degenerate state, failed factorization).
    NumericalError = 4,
    /// File system failure.
    IoError = 5,
    /// A required pointer was null.
    NullPointer = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// Opaque dataset handle (locations, covariates, losses).
pub struct SwDataset(Dataset);

/// Opaque posterior-draws handle (draw matrix plus chain metadata).
pub struct SwDraws(PosteriorDraws);

/// Chain settings shared by fitting and shape selection. Obtain defaults
/// from [`sw_chain_config_default`] and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SwChainConfig {
    /// Shape of the coefficient prior coordinates.
    pub alpha_beta: f64,
    /// Scale of the coefficient prior coordinates.
    pub kappa_beta: f64,
    /// Shape of the latent-field prior coordinates.
    pub alpha_w: f64,
    /// Scale of the latent-field prior coordinates.
    pub kappa_w: f64,
    /// Random-walk step of the coefficient-scale update.
    pub mh_step_sigma: f64,
    /// Random-walk step of the spatial-scale update.
    pub mh_step_sigma_w: f64,
    /// Total Gibbs sweeps.
    pub n_iter: usize,
    /// Sweeps discarded as burn-in.
    pub n_burn: usize,
    /// Chain seed; identical inputs and seed reproduce draws exactly.
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn record_error(message: &str) {
    let sanitized: String = message.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(e: &Error) -> SwStatus {
    record_error(&e.to_string());
    match e {
        Error::Config(_) | Error::Invalid(_) => SwStatus::InvalidArgument,
        Error::Ingest { .. } => SwStatus::IngestError,
        Error::Numerical(_) | Error::Factorization { .. } => SwStatus::NumericalError,
        Error::Io(_) => SwStatus::IoError,
    }
}

fn fail_null(name: &str) -> SwStatus {
    record_error(&format!("required pointer {name} is null"));
    SwStatus::NullPointer
}

fn fail_invalid(message: &str) -> SwStatus {
    record_error(message);
    SwStatus::InvalidArgument
}

/// Run a closure with panics converted to [`SwStatus::Panic`].
fn guarded<F: FnOnce() -> SwStatus>(f: F) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            record_error("internal panic caught at the C boundary");
            SwStatus::Panic
        }
    }
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default chain configuration: the library's documented prior and sampler
/// defaults with 5000 sweeps, 2000 burn-in, seed 0.
#[no_mangle]
pub extern "C" fn sw_chain_config_default() -> SwChainConfig {
    let h = Hyperparams::new(0.5);
    SwChainConfig {
        alpha_beta: h.alpha_beta,
        kappa_beta: h.kappa_beta,
        alpha_w: h.alpha_w,
        kappa_w: h.kappa_w,
        mh_step_sigma: h.mh_step_sigma,
        mh_step_sigma_w: h.mh_step_sigma_w,
        n_iter: 5000,
        n_burn: 2000,
        seed: 0,
    }
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn hyper_from(cfg: &SwChainConfig, phi_grid: &[f64], k: f64) -> Hyperparams {
    let mut h = Hyperparams::new(k);
    h.alpha_beta = cfg.alpha_beta;
    h.kappa_beta = cfg.kappa_beta;
    h.alpha_w = cfg.alpha_w;
    h.kappa_w = cfg.kappa_w;
    h.mh_step_sigma = cfg.mh_step_sigma;
    h.mh_step_sigma_w = cfg.mh_step_sigma_w;
    h.phi_grid = phi_grid.to_vec();
    h
}

/// Build a dataset from caller-owned arrays.
///
/// `coords` holds `n` coordinate pairs row-major (`x,y` planar when
/// `planar != 0`, else `lon,lat` in degrees); `x` holds the `n × p`
/// covariate matrix row-major; `z` holds the `n` positive losses. On
/// success `*out` owns the new handle; free it with [`sw_dataset_free`].
///
/// # Safety
/// Pointers must be valid for the stated lengths and `out` must be a valid
/// destination.
#[no_mangle]
pub unsafe extern "C" fn sw_dataset_from_arrays(
    n: usize,
    p: usize,
    coords: *const f64,
    planar: c_int,
    x: *const f64,
    z: *const f64,
    out: *mut *mut SwDataset,
) -> SwStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let Some(coords) = slice_arg(coords, n.saturating_mul(2)) else {
            return fail_null("coords");
        };
        let Some(x) = slice_arg(x, n.saturating_mul(p)) else {
            return fail_null("x");
        };
        let Some(z) = slice_arg(z, n) else {
            return fail_null("z");
        };
        let mode = if planar != 0 { CoordMode::Planar } else { CoordMode::LonLat };
        let pairs: Vec<[f64; 2]> = (0..n).map(|i| [coords[2 * i], coords[2 * i + 1]]).collect();
        let locs = match LocationSet::new(pairs, mode) {
            Ok(l) => l,
            Err(e) => return fail(&e),
        };
        let xmat = nalgebra::DMatrix::from_fn(n, p, |i, j| x[i * p + j]);
        let zvec = nalgebra::DVector::from_column_slice(z);
        match Dataset::new(locs, xmat, zvec) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(SwDataset(ds)));
                SwStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Read a loss-record CSV (the CLI's documented schema) into a dataset.
/// `intercept != 0` prepends a column of ones to the covariates.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// destination.
#[no_mangle]
pub unsafe extern "C" fn sw_dataset_read_csv(
    path: *const c_char,
    intercept: c_int,
    out: *mut *mut SwDataset,
) -> SwStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        if path.is_null() {
            return fail_null("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail_invalid("path is not valid UTF-8");
        };
        match ingest(Path::new(path), intercept != 0) {
            Ok((ds, _report)) => {
                *out = Box::into_raw(Box::new(SwDataset(ds)));
                SwStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `ds` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn sw_dataset_n(ds: *const SwDataset) -> usize {
    if ds.is_null() {
        0
    } else {
        (*ds).0.n()
    }
}

/// Number of covariates, or 0 for a null handle.
///
/// # Safety
/// `ds` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn sw_dataset_p(ds: *const SwDataset) -> usize {
    if ds.is_null() {
        0
    } else {
        (*ds).0.p()
    }
}

/// Destroy a dataset handle (null is a no-op).
///
/// # Safety
/// `ds` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn sw_dataset_free(ds: *mut SwDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fit one Gibbs chain at Weibull shape `k` and hand back the stored draws.
/// `phi_grid` lists the candidate spatial ranges (strictly increasing). On
/// success `*out` owns the draws; free with [`sw_draws_free`].
///
/// # Safety
/// `ds` must be a live dataset handle; `cfg`, `phi_grid`, and `out` must be
/// valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sw_fit(
    ds: *const SwDataset,
    cfg: *const SwChainConfig,
    phi_grid: *const f64,
    phi_grid_len: usize,
    k: f64,
    out: *mut *mut SwDraws,
) -> SwStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        if ds.is_null() {
            return fail_null("ds");
        }
        if cfg.is_null() {
            return fail_null("cfg");
        }
        let Some(grid) = slice_arg(phi_grid, phi_grid_len) else {
            return fail_null("phi_grid");
        };
        let cfg = &*cfg;
        let hyper = hyper_from(cfg, grid, k);
        match run_chain(&(*ds).0, &hyper, cfg.n_iter, cfg.n_burn, cfg.seed) {
            Ok(draws) => {
                *out = Box::into_raw(Box::new(SwDraws(draws)));
                SwStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Stored draw count, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live draws handle or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_rows(d: *const SwDraws) -> usize {
    if d.is_null() {
        0
    } else {
        (*d).0.n_draws()
    }
}

/// Columns per draw (`p + n + 3`), or 0 for a null handle.
///
/// # Safety
/// `d` must be a live draws handle or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_cols(d: *const SwDraws) -> usize {
    if d.is_null() {
        0
    } else {
        (*d).0.draws().ncols()
    }
}

/// Number of regression coefficients, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live draws handle or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_p(d: *const SwDraws) -> usize {
    if d.is_null() {
        0
    } else {
        (*d).0.p()
    }
}

/// Number of latent sites, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live draws handle or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_n(d: *const SwDraws) -> usize {
    if d.is_null() {
        0
    } else {
        (*d).0.n()
    }
}

/// Weibull shape the chain was run at, or NaN for a null handle.
///
/// # Safety
/// `d` must be a live draws handle or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_k(d: *const SwDraws) -> f64 {
    if d.is_null() {
        f64::NAN
    } else {
        (*d).0.meta().k
    }
}

/// Copy one value of the draw matrix into `*out` (bounds-checked).
///
/// # Safety
/// `d` must be a live draws handle; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_get(
    d: *const SwDraws,
    row: usize,
    col: usize,
    out: *mut f64,
) -> SwStatus {
    guarded(|| {
        if d.is_null() {
            return fail_null("d");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let m = (*d).0.draws();
        if row >= m.nrows() || col >= m.ncols() {
            return fail_invalid(&format!(
                "index ({row}, {col}) out of bounds for {} x {} draws",
                m.nrows(),
                m.ncols()
            ));
        }
        *out = m[(row, col)];
        SwStatus::Ok
    })
}

/// Serialize draws to the CLI's draws.csv format.
///
/// # Safety
/// `d` must be a live draws handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_write_csv(d: *const SwDraws, path: *const c_char) -> SwStatus {
    guarded(|| {
        if d.is_null() {
            return fail_null("d");
        }
        if path.is_null() {
            return fail_null("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail_invalid("path is not valid UTF-8");
        };
        match write_draws(Path::new(path), &(*d).0) {
            Ok(()) => SwStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Reload a draws file written by this library or the CLI.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// destination.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_read_csv(path: *const c_char, out: *mut *mut SwDraws) -> SwStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        if path.is_null() {
            return fail_null("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail_invalid("path is not valid UTF-8");
        };
        match load_draws(Path::new(path)) {
            Ok(draws) => {
                *out = Box::into_raw(Box::new(SwDraws(draws)));
                SwStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Destroy a draws handle (null is a no-op).
///
/// # Safety
/// `d` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn sw_draws_free(d: *mut SwDraws) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Fit one chain per candidate shape and score each by LPML.
///
/// Writes one LPML per `k_grid` entry into `out_lpml` (NaN for a row whose
/// fit failed) and the index of the best row into `*out_best`. Fails with
/// [`SwStatus::NumericalError`] if every row failed.
///
/// # Safety
/// `ds`, `cfg`, `k_grid`, `phi_grid` must be valid for the stated lengths;
/// `out_lpml` must have room for `k_grid_len` values; `out_best` must be a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn sw_lpml(
    ds: *const SwDataset,
    cfg: *const SwChainConfig,
    phi_grid: *const f64,
    phi_grid_len: usize,
    k_grid: *const f64,
    k_grid_len: usize,
    out_lpml: *mut f64,
    out_best: *mut usize,
) -> SwStatus {
    guarded(|| {
        if ds.is_null() {
            return fail_null("ds");
        }
        if cfg.is_null() {
            return fail_null("cfg");
        }
        if out_lpml.is_null() {
            return fail_null("out_lpml");
        }
        if out_best.is_null() {
            return fail_null("out_best");
        }
        let Some(grid) = slice_arg(phi_grid, phi_grid_len) else {
            return fail_null("phi_grid");
        };
        let Some(ks) = slice_arg(k_grid, k_grid_len) else {
            return fail_null("k_grid");
        };
        let cfg = &*cfg;
        let template = hyper_from(cfg, grid, 0.5);
        let rows = match lpml_grid(&(*ds).0, &template, ks, cfg.n_iter, cfg.n_burn, cfg.seed) {
            Ok(rows) => rows,
            Err(e) => return fail(&e),
        };
        let mut best = None;
        for (i, row) in rows.iter().enumerate() {
            *out_lpml.add(i) = row.lpml.unwrap_or(f64::NAN);
            if row.best {
                best = Some(i);
            }
        }
        match best {
            Some(i) => {
                *out_best = i;
                SwStatus::Ok
            }
            None => {
                let detail = rows
                    .iter()
                    .find_map(|r| r.error.clone())
                    .unwrap_or_else(|| "unknown failure".into());
                record_error(&format!("every shape failed to fit; first error: {detail}"));
                SwStatus::NumericalError
            }
        }
    })
}

/// Simulate the posterior predictive at an observed site (0-based) and
/// evaluate VaR, ES, and TVaR at each level. The Weibull shape is taken
/// from the draws' metadata. Output arrays must hold `levels_len` values.
///
/// # Safety
/// All pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sw_risk(
    d: *const SwDraws,
    x_star: *const f64,
    x_star_len: usize,
    site: usize,
    n_pred_per_draw: usize,
    levels: *const f64,
    levels_len: usize,
    seed: u64,
    out_var: *mut f64,
    out_es: *mut f64,
    out_tvar: *mut f64,
) -> SwStatus {
    guarded(|| {
        if d.is_null() {
            return fail_null("d");
        }
        if out_var.is_null() || out_es.is_null() || out_tvar.is_null() {
            return fail_null("out_var/out_es/out_tvar");
        }
        let Some(xs) = slice_arg(x_star, x_star_len) else {
            return fail_null("x_star");
        };
        let Some(levels) = slice_arg(levels, levels_len) else {
            return fail_null("levels");
        };
        let draws = &(*d).0;
        let query =
            PredictiveQuery { x_star: xs.to_vec(), site, n_pred_per_draw };
        let mut rng = rng_from_seed(seed);
        match compute_risk_report(draws, &query, draws.meta().k, levels, &mut rng) {
            Ok(report) => {
                for i in 0..levels_len {
                    *out_var.add(i) = report.var()[i];
                    *out_es.add(i) = report.es()[i];
                    *out_tvar.add(i) = report.tvar()[i];
                }
                SwStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
