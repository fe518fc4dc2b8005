//! Spatial geometry and covariance.
//!
//! Locations are points in the plane or on the globe ([`CoordMode`] says
//! which). From a [`LocationSet`] we build a pairwise distance matrix, turn
//! it into an exponential covariogram `σ_w² · exp(−d/φ)`, and factor that
//! into the lower-triangular square root the latent-field prior uses as its
//! transform matrix. The Cholesky and triangular-inverse routines are
//! hand-rolled so factorization failures can report the exact pivot at which
//! positive definiteness broke down.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Mean Earth radius in kilometers, used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// How the two coordinate columns of a location set are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordMode {
    /// Coordinates are planar x–y; distances are Euclidean in the same units.
    Planar,
    /// Coordinates are longitude–latitude in degrees; distances are
    /// great-circle kilometers on a sphere of radius [`EARTH_RADIUS_KM`].
    LonLat,
}

/// A validated set of n distinct spatial locations.
///
/// Duplicate locations are rejected at construction: they would make every
/// covariogram built from this set singular. If two observations genuinely
/// share a site, jitter one of them by a small amount instead.
#[derive(Clone, Debug)]
pub struct LocationSet {
    coords: Vec<[f64; 2]>,
    mode: CoordMode,
}

impl LocationSet {
    /// Validate and wrap a list of `[x, y]` (or `[lon, lat]`) pairs.
    ///
    /// Errors if the list is empty, any coordinate is non-finite, lon–lat
    /// values fall outside `[−180, 180] × [−90, 90]`, or two locations are
    /// exactly identical.
    pub fn new(coords: Vec<[f64; 2]>, mode: CoordMode) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("location set must contain at least one point"));
        }
        for (i, c) in coords.iter().enumerate() {
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite coordinate at location {i}: ({}, {})",
                    c[0], c[1]
                )));
            }
            if mode == CoordMode::LonLat {
                if !(-180.0..=180.0).contains(&c[0]) {
                    return Err(Error::invalid(format!(
                        "longitude {} at location {i} outside [-180, 180]",
                        c[0]
                    )));
                }
                if !(-90.0..=90.0).contains(&c[1]) {
                    return Err(Error::invalid(format!(
                        "latitude {} at location {i} outside [-90, 90]",
                        c[1]
                    )));
                }
            }
        }
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| {
            coords[a]
                .partial_cmp(&coords[b])
                .expect("coordinates checked finite")
        });
        for w in order.windows(2) {
            if coords[w[0]] == coords[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::invalid(format!(
                    "locations {a} and {b} are identical; the spatial covariance would be \
                     singular (jitter one of them to distinguish the sites)"
                )));
            }
        }
        Ok(Self { coords, mode })
    }

    /// Number of locations.
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate interpretation.
    pub fn mode(&self) -> CoordMode {
        self.mode
    }

    /// The validated coordinate pairs.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }
}

/// Great-circle distance in km between two (lon, lat) points in degrees,
/// by the spherical law of cosines with the cosine clamped to [−1, 1].
fn great_circle_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (lon1, lat1) = (a[0].to_radians(), a[1].to_radians());
    let (lon2, lat2) = (b[0].to_radians(), b[1].to_radians());
    let c = lat1.sin() * lat2.sin() + lat1.cos() * lat2.cos() * (lon1 - lon2).cos();
    EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
}

/// Pairwise distance matrix of a location set.
///
/// Symmetric with a zero diagonal. Planar mode gives Euclidean distances in
/// coordinate units; lon–lat mode gives great-circle distances in km.
pub fn distance_matrix(locs: &LocationSet) -> DMatrix<f64> {
    let n = locs.n();
    let coords = locs.coords();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = match locs.mode() {
                CoordMode::Planar => {
                    let dx = coords[i][0] - coords[j][0];
                    let dy = coords[i][1] - coords[j][1];
                    dx.hypot(dy)
                }
                CoordMode::LonLat => great_circle_km(coords[i], coords[j]),
            };
            d[(i, j)] = dij;
            d[(j, i)] = dij;
        }
    }
    d
}

/// Exponential covariogram: `σ_w² · exp(−d_ij / φ)` elementwise.
///
/// The diagonal is exactly `σ_w²`; for distinct locations the result is
/// symmetric positive definite. `phi` is the spatial range (larger `phi`
/// means longer-range dependence) and `sigma_w` is the field's marginal
/// standard deviation.
pub fn exp_covariogram(dist: &DMatrix<f64>, phi: f64, sigma_w: f64) -> Result<DMatrix<f64>> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::invalid(format!("covariogram range phi must be positive, got {phi}")));
    }
    if !(sigma_w > 0.0) || !sigma_w.is_finite() {
        return Err(Error::invalid(format!(
            "covariogram scale sigma_w must be positive, got {sigma_w}"
        )));
    }
    if !dist.is_square() {
        return Err(Error::invalid("distance matrix must be square"));
    }
    let n = dist.nrows();
    for i in 0..n {
        if dist[(i, i)] != 0.0 {
            return Err(Error::invalid(format!("distance matrix has nonzero diagonal at {i}")));
        }
        for j in 0..i {
            let d = dist[(i, j)];
            if !(d >= 0.0) || d != dist[(j, i)] {
                return Err(Error::invalid(format!(
                    "distance matrix must be symmetric and nonnegative (entry ({i}, {j}))"
                )));
            }
        }
    }
    let s2 = sigma_w * sigma_w;
    Ok(dist.map(|d| s2 * (-d / phi).exp()))
}

/// An exponential covariogram bound to a distance matrix.
#[derive(Clone, Debug)]
pub struct Covariogram {
    phi: f64,
    sigma_w: f64,
    dist: DMatrix<f64>,
}

impl Covariogram {
    /// Validate the range, scale, and distance matrix together.
    pub fn new(phi: f64, sigma_w: f64, dist: DMatrix<f64>) -> Result<Self> {
        // Share validation with exp_covariogram by evaluating it once.
        exp_covariogram(&dist, phi, sigma_w)?;
        Ok(Self { phi, sigma_w, dist })
    }

    /// Spatial range parameter.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Marginal standard deviation of the field.
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    /// The underlying distance matrix.
    pub fn dist(&self) -> &DMatrix<f64> {
        &self.dist
    }

    /// Materialize the covariance matrix `σ_w² · exp(−dist/φ)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        exp_covariogram(&self.dist, self.phi, self.sigma_w)
            .expect("validated at construction")
    }
}

/// Lower Cholesky factor `L` of a symmetric positive-definite matrix, with
/// `L L′ = Sigma`.
///
/// This is the square root used for MLG transform matrices throughout the
/// crate. On failure the error reports the 0-based pivot index at which the
/// matrix stopped being positive definite, which for covariogram inputs
/// usually points at a (nearly) duplicated location.
pub fn matrix_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::invalid("matrix_sqrt requires a square matrix"));
    }
    let n = sigma.nrows();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (sigma[(i, j)], sigma[(j, i)]);
            let scale = a.abs().max(b.abs()).max(1.0);
            if (a - b).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!(
                    "matrix_sqrt requires a symmetric matrix (entry ({i}, {j}))"
                )));
            }
        }
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = sigma[(j, j)];
        for t in 0..j {
            d -= l[(j, t)] * l[(j, t)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Factorization {
                index: j,
                message: format!("non-positive pivot {d:e}; matrix is not positive definite"),
            });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = sigma[(i, j)];
            for t in 0..j {
                s -= l[(i, t)] * l[(j, t)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
///
/// Errors if the matrix is not square or has a zero or non-finite diagonal
/// entry (reported by pivot index). The result is again lower triangular.
pub fn lower_triangular_inverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !l.is_square() {
        return Err(Error::invalid("lower_triangular_inverse requires a square matrix"));
    }
    let n = l.nrows();
    for j in 0..n {
        let d = l[(j, j)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Factorization {
                index: j,
                message: format!("zero or non-finite diagonal entry {d:e}"),
            });
        }
    }
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for t in j..i {
                s += l[(i, t)] * inv[(t, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    Ok(inv)
}
