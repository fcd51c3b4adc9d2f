//! The five distribution classes and their samplers.
//!
//! Four classes live in R^d: centred Gaussians (G), heavy-tailed laws with
//! density proportional to (1 + |x|^2/sigma^2)^{-beta} (H), beta-type laws on
//! the sigma-ball with density proportional to (1 - |x|^2/sigma^2)^beta (B),
//! and the uniform distribution on the sigma-sphere (U). The fifth class (S)
//! lives on the open upper half-sphere of S^d in R^{d+1} with density
//! proportional to y_{d+1}^alpha; it is sampled by pushing H-class points
//! through the gnomonic projection.
//!
//! All densities are evaluated in log-space and exponentiated last; all
//! samplers draw at scale 1 and multiply by sigma as the final step, so a
//! cloud at scale sigma is coordinatewise exactly sigma times the cloud at
//! scale 1 under the same seed.

use crate::error::{Error, Result};
use crate::rng::replicate_rng;
use crate::special::{ln_gamma, LN_SQRT_2PI};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma, StandardNormal};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::io::{self, BufRead, Write};

/// Relative tolerance for "is this point on the sphere" checks in density
/// evaluation (the support is measure zero, so an explicit band is needed).
pub const ON_SPHERE_REL_TOL: f64 = 1e-9;

/// Distribution class tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    G,
    H,
    B,
    U,
    S,
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Class::G => "G",
            Class::H => "H",
            Class::B => "B",
            Class::U => "U",
            Class::S => "S",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Inner {
    Gaussian { d: usize, sigma: f64 },
    HeavyTail { d: usize, beta: f64, sigma: f64 },
    BetaBall { d: usize, beta: f64, sigma: f64 },
    SphereUniform { d: usize, sigma: f64 },
    HalfSphere { d: usize, alpha: f64 },
}

/// A fully validated description of one distribution.
///
/// For classes G, H, B, U the ambient dimension is `d` and points have `d`
/// coordinates; for class S points live on the unit d-sphere in R^{d+1} and
/// carry `d + 1` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    inner: Inner,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be at least 2".into()));
    }
    if d > 8 {
        return Err(Error::InvalidParameter("dimension must be at most 8".into()));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    Ok(())
}

impl DistributionSpec {
    /// Centred Gaussian on R^d with scale sigma.
    pub fn gaussian(d: usize, sigma: f64) -> Result<Self> {
        check_dim(d)?;
        check_sigma(sigma)?;
        Ok(Self { inner: Inner::Gaussian { d, sigma } })
    }

    /// Heavy-tailed law on R^d, density ~ (1 + |x|^2/sigma^2)^{-beta}.
    pub fn heavy_tail(d: usize, beta: f64, sigma: f64) -> Result<Self> {
        check_dim(d)?;
        check_sigma(sigma)?;
        if !(beta > d as f64 / 2.0) {
            return Err(Error::InvalidParameter("beta must exceed d/2".into()));
        }
        Ok(Self { inner: Inner::HeavyTail { d, beta, sigma } })
    }

    /// Beta-type law on the sigma-ball in R^d, density ~ (1 - |x|^2/sigma^2)^beta.
    pub fn beta_ball(d: usize, beta: f64, sigma: f64) -> Result<Self> {
        check_dim(d)?;
        check_sigma(sigma)?;
        if !(beta > -1.0) {
            return Err(Error::InvalidParameter("beta must exceed -1".into()));
        }
        Ok(Self { inner: Inner::BetaBall { d, beta, sigma } })
    }

    /// Uniform distribution on the (d-1)-sphere of radius sigma in R^d.
    pub fn sphere_uniform(d: usize, sigma: f64) -> Result<Self> {
        check_dim(d)?;
        check_sigma(sigma)?;
        Ok(Self { inner: Inner::SphereUniform { d, sigma } })
    }

    /// Law on the open upper half of the unit d-sphere in R^{d+1}, density
    /// ~ y_{d+1}^alpha with respect to spherical Lebesgue measure.
    pub fn half_sphere(d: usize, alpha: f64) -> Result<Self> {
        check_dim(d)?;
        if !(alpha > -1.0) {
            return Err(Error::InvalidParameter("alpha must exceed -1".into()));
        }
        Ok(Self { inner: Inner::HalfSphere { d, alpha } })
    }

    pub fn class(&self) -> Class {
        match self.inner {
            Inner::Gaussian { .. } => Class::G,
            Inner::HeavyTail { .. } => Class::H,
            Inner::BetaBall { .. } => Class::B,
            Inner::SphereUniform { .. } => Class::U,
            Inner::HalfSphere { .. } => Class::S,
        }
    }

    /// Ambient dimension d (hulls are d-dimensional for every class; class S
    /// hulls are taken after projection to R^d).
    pub fn dim(&self) -> usize {
        match self.inner {
            Inner::Gaussian { d, .. }
            | Inner::HeavyTail { d, .. }
            | Inner::BetaBall { d, .. }
            | Inner::SphereUniform { d, .. }
            | Inner::HalfSphere { d, .. } => d,
        }
    }

    /// Number of coordinates each sampled point carries.
    pub fn point_len(&self) -> usize {
        match self.inner {
            Inner::HalfSphere { d, .. } => d + 1,
            _ => self.dim(),
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.inner {
            Inner::HeavyTail { beta, .. } | Inner::BetaBall { beta, .. } => Some(beta),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.inner {
            Inner::HalfSphere { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Scale parameter (class S has none and reports 1).
    pub fn sigma(&self) -> f64 {
        match self.inner {
            Inner::Gaussian { sigma, .. }
            | Inner::HeavyTail { sigma, .. }
            | Inner::BetaBall { sigma, .. }
            | Inner::SphereUniform { sigma, .. } => sigma,
            Inner::HalfSphere { .. } => 1.0,
        }
    }

    /// Same distribution with the scale replaced by 1 (identity for S).
    pub fn with_unit_sigma(&self) -> Self {
        let inner = match self.inner {
            Inner::Gaussian { d, .. } => Inner::Gaussian { d, sigma: 1.0 },
            Inner::HeavyTail { d, beta, .. } => Inner::HeavyTail { d, beta, sigma: 1.0 },
            Inner::BetaBall { d, beta, .. } => Inner::BetaBall { d, beta, sigma: 1.0 },
            Inner::SphereUniform { d, .. } => Inner::SphereUniform { d, sigma: 1.0 },
            s @ Inner::HalfSphere { .. } => s,
        };
        Self { inner }
    }

    /// Normalized probability density at `x` (with respect to Lebesgue
    /// measure for G, H, B and to spherical Lebesgue measure for U, S).
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.point_len() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.point_len()
            )));
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self.inner {
            Inner::Gaussian { d, sigma } => {
                let ln = -(d as f64) * (LN_SQRT_2PI + sigma.ln()) - 0.5 * r2 / (sigma * sigma);
                Ok(ln.exp())
            }
            Inner::HeavyTail { d, beta, sigma } => {
                let ln = ln_c_heavy(d, beta) - (d as f64) * sigma.ln()
                    - beta * (r2 / (sigma * sigma)).ln_1p();
                Ok(ln.exp())
            }
            Inner::BetaBall { d, beta, sigma } => {
                let t = 1.0 - r2 / (sigma * sigma);
                if t < 0.0 {
                    return Err(Error::Domain("point outside the support ball".into()));
                }
                if t == 0.0 {
                    // boundary: (1-1)^beta
                    return Ok(if beta > 0.0 {
                        0.0
                    } else if beta == 0.0 {
                        (ln_c_beta_ball(d, beta) - (d as f64) * sigma.ln()).exp()
                    } else {
                        f64::INFINITY
                    });
                }
                let ln = ln_c_beta_ball(d, beta) - (d as f64) * sigma.ln() + beta * t.ln();
                Ok(ln.exp())
            }
            Inner::SphereUniform { d, sigma } => {
                let r = r2.sqrt();
                if ((r - sigma) / sigma).abs() > ON_SPHERE_REL_TOL {
                    return Err(Error::Domain("point is not on the support sphere".into()));
                }
                Ok((-(ln_omega(d) + (d as f64 - 1.0) * sigma.ln())).exp())
            }
            Inner::HalfSphere { d, alpha } => {
                let r = r2.sqrt();
                if (r - 1.0).abs() > ON_SPHERE_REL_TOL {
                    return Err(Error::Domain("point is not on the unit sphere".into()));
                }
                let height = x[d];
                if height <= 0.0 {
                    return Err(Error::Domain(
                        "point is not on the open upper half-sphere".into(),
                    ));
                }
                Ok((ln_c_half_sphere(d, alpha) + alpha * height.ln()).exp())
            }
        }
    }

    /// Draws `n` points; the cloud is a pure function of (self, n, seed).
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        self.sample_replicate(n, seed, 0, 0)
    }

    /// Draws `n` points from the stream assigned to `replicate` (and retry
    /// attempt) under the master `seed`. Streams for distinct coordinates are
    /// independent, which is what makes worker-count-independent parallel
    /// Monte Carlo possible.
    pub fn sample_replicate(
        &self,
        n: usize,
        seed: u64,
        replicate: u64,
        retry: u32,
    ) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one point".into()));
        }
        let mut rng = replicate_rng(seed, replicate, retry);
        let len = self.point_len();
        let mut coords = Vec::with_capacity(n * len);
        match self.inner {
            Inner::Gaussian { d, sigma } => {
                for _ in 0..n {
                    for _ in 0..d {
                        let z: f64 = rng.sample(StandardNormal);
                        coords.push(sigma * z);
                    }
                }
            }
            Inner::HeavyTail { d, beta, sigma } => {
                let nu = 2.0 * beta - d as f64;
                let chi2 = Gamma::new(nu / 2.0, 2.0)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut z = vec![0.0; d];
                for _ in 0..n {
                    fill_normal(&mut rng, &mut z);
                    let w: f64 = chi2.sample(&mut rng);
                    let scale = w.sqrt().recip();
                    coords.extend(z.iter().map(|zi| sigma * (zi * scale)));
                }
            }
            Inner::BetaBall { d, beta, sigma } => {
                let radial = BetaDist::new(d as f64 / 2.0, beta + 1.0)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut z = vec![0.0; d];
                for _ in 0..n {
                    let u = unit_direction(&mut rng, &mut z);
                    let t: f64 = radial.sample(&mut rng);
                    // for beta near -1 the radial law piles up so close to the
                    // boundary that t rounds to 1.0; keep the point strictly
                    // inside the open ball
                    let r = t.sqrt().min(1.0 - 4.0 * f64::EPSILON);
                    coords.extend(u.iter().map(|ui| sigma * (r * ui)));
                }
            }
            Inner::SphereUniform { d, sigma } => {
                let mut z = vec![0.0; d];
                for _ in 0..n {
                    let u = unit_direction(&mut rng, &mut z);
                    coords.extend(u.iter().map(|ui| sigma * ui));
                }
            }
            Inner::HalfSphere { d, alpha } => {
                // push-forward of the heavy-tailed class through the gnomonic
                // map; the exponents are linked by alpha = 2 beta - d - 1
                let beta = (alpha + d as f64 + 1.0) / 2.0;
                let nu = 2.0 * beta - d as f64;
                let chi2 = Gamma::new(nu / 2.0, 2.0)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut z = vec![0.0; d];
                let mut x = vec![0.0; d];
                for _ in 0..n {
                    fill_normal(&mut rng, &mut z);
                    let w: f64 = chi2.sample(&mut rng);
                    let scale = w.sqrt().recip();
                    for (xi, zi) in x.iter_mut().zip(&z) {
                        *xi = zi * scale;
                    }
                    let denom = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    coords.extend(x.iter().map(|xi| xi / denom));
                    coords.push(denom.recip());
                }
            }
        }
        Ok(PointCloud { spec: *self, seed, dim: len, coords })
    }
}

fn fill_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Draws a uniform unit vector by normalizing a Gaussian; redraws on the
/// (measure-zero) event of an exactly vanishing norm.
fn unit_direction<'a>(rng: &mut ChaCha8Rng, z: &'a mut [f64]) -> &'a [f64] {
    loop {
        fill_normal(rng, z);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in z.iter_mut() {
                *v /= norm;
            }
            return z;
        }
    }
}

/// ln of the normalization constant of the heavy-tailed density at sigma = 1:
/// pi^{-d/2} Gamma(beta) / Gamma(beta - d/2).
pub fn ln_c_heavy(d: usize, beta: f64) -> f64 {
    -(d as f64 / 2.0) * std::f64::consts::PI.ln() + ln_gamma(beta) - ln_gamma(beta - d as f64 / 2.0)
}

/// ln of the normalization constant of the ball density at sigma = 1:
/// pi^{-d/2} Gamma(d/2 + beta + 1) / Gamma(beta + 1).
pub fn ln_c_beta_ball(d: usize, beta: f64) -> f64 {
    -(d as f64 / 2.0) * std::f64::consts::PI.ln() + ln_gamma(d as f64 / 2.0 + beta + 1.0)
        - ln_gamma(beta + 1.0)
}

/// ln of the total surface measure of the unit (d-1)-sphere in R^d.
pub fn ln_omega(d: usize) -> f64 {
    std::f64::consts::LN_2 + (d as f64 / 2.0) * std::f64::consts::PI.ln()
        - ln_gamma(d as f64 / 2.0)
}

/// ln of the normalization constant of the half-sphere density: the
/// gnomonic push-forward of the heavy-tailed class gives
/// c_{S,alpha} = c_{H,d,(alpha+d+1)/2}.
pub fn ln_c_half_sphere(d: usize, alpha: f64) -> f64 {
    ln_c_heavy(d, (alpha + d as f64 + 1.0) / 2.0)
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("class", &self.class().to_string())?;
        map.serialize_entry("d", &self.dim())?;
        if let Some(beta) = self.beta() {
            map.serialize_entry("beta", &beta)?;
        }
        if let Some(alpha) = self.alpha() {
            map.serialize_entry("alpha", &alpha)?;
        }
        map.serialize_entry("sigma", &self.sigma())?;
        map.end()
    }
}

/// A sampled point set together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    spec: DistributionSpec,
    seed: u64,
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Coordinates per point.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Row-major coordinate storage.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Writes the cloud as CSV: header `x1,...,xd` (or `y1,...,y{d+1}` for
    /// spherical clouds), one row per point. Values use the shortest decimal
    /// form that parses back to the identical f64.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let letter = if self.spec.class() == Class::S { 'y' } else { 'x' };
        let header: Vec<String> = (1..=self.dim).map(|i| format!("{letter}{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Reads a point-cloud CSV written by [`PointCloud::write_csv`]; returns the
/// per-point dimension and the row-major coordinates.
pub fn read_cloud_csv<R: BufRead>(r: R) -> Result<(usize, Vec<f64>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    let dim = header.split(',').count();
    if dim == 0 {
        return Err(Error::Parse("empty header".into()));
    }
    let mut coords = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad float {field:?} on row {}", lineno + 2)))?;
            coords.push(v);
            count += 1;
        }
        if count != dim {
            return Err(Error::Parse(format!(
                "row {} has {count} fields, expected {dim}",
                lineno + 2
            )));
        }
    }
    if coords.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    Ok((dim, coords))
}
