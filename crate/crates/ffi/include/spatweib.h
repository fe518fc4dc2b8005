#ifndef SPATWEIB_H
#define SPATWEIB_H

/* Generated from the spatweib-ffi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum SwStatus {
  /**
   * Success.
   */
  SW_STATUS_OK = 0,
  /**
   * Invalid argument or configuration.
   */
  SW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data could not be parsed.
   */
  SW_STATUS_INGEST_ERROR = 3,
  /**
   * Numerical failure (degenerate state, failed factorization).
   */
  SW_STATUS_NUMERICAL_ERROR = 4,
  /**
   * File system failure.
   */
  SW_STATUS_IO_ERROR = 5,
  /**
   * A required pointer was null.
   */
  SW_STATUS_NULL_POINTER = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  SW_STATUS_PANIC = 7,
} SwStatus;

/**
 * Opaque dataset handle (locations, covariates, losses).
 */
typedef struct SwDataset SwDataset;

/**
 * Opaque posterior-draws handle (draw matrix plus chain metadata).
 */
typedef struct SwDraws SwDraws;

/**
 * Chain settings shared by fitting and shape selection. Obtain defaults
 * from [`sw_chain_config_default`] and override fields as needed.
 */
typedef struct SwChainConfig {
  /**
   * Shape of the coefficient prior coordinates.
   */
  double alpha_beta;
  /**
   * Scale of the coefficient prior coordinates.
   */
  double kappa_beta;
  /**
   * Shape of the latent-field prior coordinates.
   */
  double alpha_w;
  /**
   * Scale of the latent-field prior coordinates.
   */
  double kappa_w;
  /**
   * Random-walk step of the coefficient-scale update.
   */
  double mh_step_sigma;
  /**
   * Random-walk step of the spatial-scale update.
   */
  double mh_step_sigma_w;
  /**
   * Total Gibbs sweeps.
   */
  size_t n_iter;
  /**
   * Sweeps discarded as burn-in.
   */
  size_t n_burn;
  /**
   * Chain seed; identical inputs and seed reproduce draws exactly.
   */
  uint64_t seed;
} SwChainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the same
 * thread.
 */
const char *sw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

/**
 * Default chain configuration: the library's documented prior and sampler
 * defaults with 5000 sweeps, 2000 burn-in, seed 0.
 */
struct SwChainConfig sw_chain_config_default(void);

/**
 * Build a dataset from caller-owned arrays.
 *
 * `coords` holds `n` coordinate pairs row-major (`x,y` planar when
 * `planar != 0`, else `lon,lat` in degrees); `x` holds the `n × p`
 * covariate matrix row-major; `z` holds the `n` positive losses. On
 * success `*out` owns the new handle; free it with [`sw_dataset_free`].
 *
 * # Safety
 * Pointers must be valid for the stated lengths and `out` must be a valid
 * destination.
 */
enum SwStatus sw_dataset_from_arrays(size_t n,
                                     size_t p,
                                     const double *coords,
                                     int planar,
                                     const double *x,
                                     const double *z,
                                     struct SwDataset **out);

/**
 * Read a loss-record CSV (the CLI's documented schema) into a dataset.
 * `intercept != 0` prepends a column of ones to the covariates.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * destination.
 */
enum SwStatus sw_dataset_read_csv(const char *path, int intercept, struct SwDataset **out);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be a live handle from this library or null.
 */
size_t sw_dataset_n(const struct SwDataset *ds);

/**
 * Number of covariates, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be a live handle from this library or null.
 */
size_t sw_dataset_p(const struct SwDataset *ds);

/**
 * Destroy a dataset handle (null is a no-op).
 *
 * # Safety
 * `ds` must be a handle from this library, not yet freed, or null.
 */
void sw_dataset_free(struct SwDataset *ds);

/**
 * Fit one Gibbs chain at Weibull shape `k` and hand back the stored draws.
 * `phi_grid` lists the candidate spatial ranges (strictly increasing). On
 * success `*out` owns the draws; free with [`sw_draws_free`].
 *
 * # Safety
 * `ds` must be a live dataset handle; `cfg`, `phi_grid`, and `out` must be
 * valid for the stated lengths.
 */
enum SwStatus sw_fit(const struct SwDataset *ds,
                     const struct SwChainConfig *cfg,
                     const double *phi_grid,
                     size_t phi_grid_len,
                     double k,
                     struct SwDraws **out);

/**
 * Stored draw count, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live draws handle or null.
 */
size_t sw_draws_rows(const struct SwDraws *d);

/**
 * Columns per draw (`p + n + 3`), or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live draws handle or null.
 */
size_t sw_draws_cols(const struct SwDraws *d);

/**
 * Number of regression coefficients, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live draws handle or null.
 */
size_t sw_draws_p(const struct SwDraws *d);

/**
 * Number of latent sites, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live draws handle or null.
 */
size_t sw_draws_n(const struct SwDraws *d);

/**
 * Weibull shape the chain was run at, or NaN for a null handle.
 *
 * # Safety
 * `d` must be a live draws handle or null.
 */
double sw_draws_k(const struct SwDraws *d);

/**
 * Copy one value of the draw matrix into `*out` (bounds-checked).
 *
 * # Safety
 * `d` must be a live draws handle; `out` must be a valid destination.
 */
enum SwStatus sw_draws_get(const struct SwDraws *d, size_t row, size_t col, double *out);

/**
 * Serialize draws to the CLI's draws.csv format.
 *
 * # Safety
 * `d` must be a live draws handle; `path` a valid NUL-terminated string.
 */
enum SwStatus sw_draws_write_csv(const struct SwDraws *d, const char *path);

/**
 * Reload a draws file written by this library or the CLI.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid
 * destination.
 */
enum SwStatus sw_draws_read_csv(const char *path, struct SwDraws **out);

/**
 * Destroy a draws handle (null is a no-op).
 *
 * # Safety
 * `d` must be a handle from this library, not yet freed, or null.
 */
void sw_draws_free(struct SwDraws *d);

/**
 * Fit one chain per candidate shape and score each by LPML.
 *
 * Writes one LPML per `k_grid` entry into `out_lpml` (NaN for a row whose
 * fit failed) and the index of the best row into `*out_best`. Fails with
 * [`SwStatus::NumericalError`] if every row failed.
 *
 * # Safety
 * `ds`, `cfg`, `k_grid`, `phi_grid` must be valid for the stated lengths;
 * `out_lpml` must have room for `k_grid_len` values; `out_best` must be a
 * valid destination.
 */
enum SwStatus sw_lpml(const struct SwDataset *ds,
                      const struct SwChainConfig *cfg,
                      const double *phi_grid,
                      size_t phi_grid_len,
                      const double *k_grid,
                      size_t k_grid_len,
                      double *out_lpml,
                      size_t *out_best);

/**
 * Simulate the posterior predictive at an observed site (0-based) and
 * evaluate VaR, ES, and TVaR at each level. The Weibull shape is taken
 * from the draws' metadata. Output arrays must hold `levels_len` values.
 *
 * # Safety
 * All pointers must be valid for the stated lengths.
 */
enum SwStatus sw_risk(const struct SwDraws *d,
                      const double *x_star,
                      size_t x_star_len,
                      size_t site,
                      size_t n_pred_per_draw,
                      const double *levels,
                      size_t levels_len,
                      uint64_t seed,
                      double *out_var,
                      double *out_es,
                      double *out_tvar);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPATWEIB_H */
