//! Half-sphere geometry: the gnomonic projection and the reduction of
//! spherical hull problems to Euclidean ones.
//!
//! The gnomonic map g sends x in R^d to the upper unit half-sphere in
//! R^{d+1},
//!
//! ```text
//!     g(x) = (x_1, ..., x_d, 1) / sqrt(1 + |x|^2),
//!     g^{-1}(y) = (y_1/y_{d+1}, ..., y_d/y_{d+1}),
//! ```
//!
//! maps great-circle arcs to straight segments, and therefore puts the
//! facets of a spherical convex hull in one-to-one correspondence with the
//! facets of the projected Euclidean hull. Pushing the heavy-tailed class
//! with exponent beta through g yields the half-sphere class with
//! alpha = 2 beta - d - 1, which is how all spherical expectations here are
//! computed: one hull engine, one quadrature route.

use crate::distributions::{Class, DistributionSpec, PointCloud};
use crate::error::{Error, Result};
use crate::estimators::{Estimate, ScanMethod, ScanReport};
use crate::hull::{hull_facets, HullSummary};

/// Points with a smaller height coordinate are rejected before projecting
/// (g^{-1} blows up on the equator).
pub const EQUATOR_GUARD: f64 = 1e-12;

/// The gnomonic projection between R^d and the open upper half of the unit
/// d-sphere in R^{d+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GnomonicMap {
    d: usize,
}

impl GnomonicMap {
    pub fn new(d: usize) -> Self {
        GnomonicMap { d }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// g(x): unit-norm vector on the open upper half-sphere.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.d, x.len())));
        }
        let denom = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut y: Vec<f64> = x.iter().map(|v| v / denom).collect();
        y.push(denom.recip());
        Ok(y)
    }

    /// g^{-1}(y); requires y_{d+1} above the equator guard.
    pub fn unproject(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.d + 1 {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                self.d + 1,
                y.len()
            )));
        }
        let height = y[self.d];
        if height < EQUATOR_GUARD {
            return Err(Error::Domain(format!(
                "height coordinate {height:.3e} is not above the equator guard {EQUATOR_GUARD:.0e}"
            )));
        }
        Ok(y[..self.d].iter().map(|v| v / height).collect())
    }

    /// Jacobian J_g(x) = (1 + |x|^2)^{-(d+1)/2} of the projection.
    pub fn jacobian(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 + r2).powf(-((self.d as f64 + 1.0) / 2.0))
    }
}

/// Applies g^{-1} to every row of a spherical cloud; returns flat Euclidean
/// coordinates of dimension `cloud.dim() - 1`.
pub fn euclidean_cloud(cloud: &PointCloud) -> Result<Vec<f64>> {
    let d = cloud.dim() - 1;
    let map = GnomonicMap::new(d);
    let mut coords = Vec::with_capacity(cloud.n() * d);
    for y in cloud.points() {
        coords.extend(map.unproject(y)?);
    }
    Ok(coords)
}

/// Facets of the spherical convex hull of points on the open upper
/// half-sphere (rows of d+1 coordinates). The index sets returned are valid
/// verbatim for the spherical hull because g maps facets to facets.
pub fn spherical_hull_facets(coords: &[f64], d: usize, tol: f64) -> Result<HullSummary> {
    if !coords.len().is_multiple_of(d + 1) {
        return Err(Error::Precondition(
            "coordinate count is not a multiple of d+1".into(),
        ));
    }
    let map = GnomonicMap::new(d);
    let n = coords.len() / (d + 1);
    let mut flat = Vec::with_capacity(n * d);
    for row in coords.chunks_exact(d + 1) {
        flat.extend(map.unproject(row)?);
    }
    hull_facets(&flat, d, tol)
}

/// The heavy-tailed distribution whose gnomonic push-forward is `spec`:
/// S(d, alpha) corresponds to H(d, beta = (alpha+d+1)/2, sigma = 1).
pub fn heavy_tail_equivalent(spec: &DistributionSpec) -> Result<DistributionSpec> {
    if spec.class() != Class::S {
        return Err(Error::Precondition(format!(
            "expected a class S spec, got {}",
            spec.class()
        )));
    }
    let alpha = spec.alpha().expect("class S carries alpha");
    DistributionSpec::heavy_tail(spec.dim(), (alpha + spec.dim() as f64 + 1.0) / 2.0, 1.0)
}

/// The half-sphere distribution obtained by pushing H(d, beta) through g:
/// alpha = 2 beta - d - 1 (automatically > -1 because beta > d/2).
pub fn spherical_equivalent(spec: &DistributionSpec) -> Result<DistributionSpec> {
    if spec.class() != Class::H {
        return Err(Error::Precondition(format!(
            "expected a class H spec, got {}",
            spec.class()
        )));
    }
    let beta = spec.beta().expect("class H carries beta");
    DistributionSpec::half_sphere(spec.dim(), 2.0 * beta - spec.dim() as f64 - 1.0)
}

/// Expected facet number of the spherical hull by quadrature, routed through
/// the Euclidean equivalence. The returned estimate keeps the original
/// spherical spec so reports stay self-describing.
pub fn spherical_expect_quad(spec: &DistributionSpec, n: usize, abs_tol: f64) -> Result<Estimate> {
    let flat = heavy_tail_equivalent(spec)?;
    let mut est = crate::estimators::expect_quad(&flat, n, abs_tol)?;
    est.spec = *spec;
    Ok(est)
}

/// Monotonicity scan for a spherical spec; quadrature goes through the
/// Euclidean equivalence, Monte Carlo samples the half-sphere directly.
pub fn spherical_scan(
    spec: &DistributionSpec,
    n_min: usize,
    n_max: usize,
    method: ScanMethod,
    seed: u64,
) -> Result<ScanReport> {
    if spec.class() != Class::S {
        return Err(Error::Precondition(format!(
            "expected a class S spec, got {}",
            spec.class()
        )));
    }
    crate::estimators::monotonicity_scan(spec, n_min, n_max, method, seed)
}
