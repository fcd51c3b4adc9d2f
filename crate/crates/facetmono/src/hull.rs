//! Convex hull facet enumeration in general dimension.
//!
//! `hull_facets` grows the hull incrementally: starting from a full
//! dimensional simplex, every further point that lies outside the current
//! hull deletes the facets it can see and is patched in along the horizon
//! ridges. A ridge of a closed simplicial boundary belongs to exactly two
//! facets, so the horizon is simply the set of ridges that occur once among
//! the visible facets; no explicit adjacency structure is needed.
//!
//! `facet_oracle` re-derives the same facet set by brute force, testing for
//! every d-subset whether the remaining points lie strictly in one open
//! half-space of its affine hull. It is the reference implementation the
//! incremental algorithm is validated against.
//!
//! Orientation predicates use floating-point determinants with a relative
//! tolerance band scaled by the Hadamard bound of the matrix rows. Inputs
//! drawn from continuous distributions are in general position almost
//! surely; a determinant inside the band sets the `degenerate` flag and the
//! caller is expected to resample rather than perturb.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Default relative tolerance of the orientation band.
pub const DEFAULT_HULL_TOL: f64 = 1e-9;

/// Maximum supported dimension (matrix buffers are stack allocated).
pub const MAX_DIM: usize = 8;

/// Facets of one convex hull: index sets of size d into the input cloud.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullSummary {
    /// Hull dimension.
    pub d: usize,
    /// Number of input points.
    pub n: usize,
    /// Facet vertex-index sets, each sorted ascending, the list sorted
    /// lexicographically.
    pub facets: Vec<Vec<usize>>,
    /// True when some orientation determinant fell inside the tolerance
    /// band; results are then untrustworthy and the input should be
    /// resampled.
    pub degenerate: bool,
}

impl HullSummary {
    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }
}

struct Points<'a> {
    coords: &'a [f64],
    dim: usize,
}

impl<'a> Points<'a> {
    fn point(&self, i: usize) -> &'a [f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn n(&self) -> usize {
        self.coords.len() / self.dim
    }
}

/// Signed volume determinant of the simplex (base[0..d], q) together with
/// the Hadamard bound used to scale the zero test. Rows are base[i]-base[0]
/// and q-base[0].
fn orientation(pts: &Points, base: &[usize], q: &[f64]) -> (f64, f64) {
    let d = pts.dim;
    let mut m = [0.0f64; MAX_DIM * MAX_DIM];
    let p0 = pts.point(base[0]);
    for (r, &bi) in base.iter().enumerate().skip(1) {
        let p = pts.point(bi);
        for c in 0..d {
            m[(r - 1) * d + c] = p[c] - p0[c];
        }
    }
    for c in 0..d {
        m[(d - 1) * d + c] = q[c] - p0[c];
    }
    det_with_scale(&mut m, d)
}

/// In-place LU determinant with partial pivoting; also returns the product
/// of the row norms of the original matrix.
fn det_with_scale(m: &mut [f64], d: usize) -> (f64, f64) {
    let mut scale = 1.0f64;
    for r in 0..d {
        let norm: f64 = (0..d).map(|c| m[r * d + c] * m[r * d + c]).sum::<f64>().sqrt();
        scale *= norm;
    }
    let mut det = 1.0f64;
    for k in 0..d {
        let mut piv = k;
        let mut best = m[k * d + k].abs();
        for r in (k + 1)..d {
            let v = m[r * d + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return (0.0, scale);
        }
        if piv != k {
            for c in 0..d {
                m.swap(k * d + c, piv * d + c);
            }
            det = -det;
        }
        let pivot = m[k * d + k];
        det *= pivot;
        for r in (k + 1)..d {
            let factor = m[r * d + k] / pivot;
            for c in (k + 1)..d {
                m[r * d + c] -= factor * m[k * d + c];
            }
        }
    }
    (det, scale)
}

fn check_input(coords: &[f64], dim: usize) -> Result<usize> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::Precondition(format!("dimension {dim} outside 2..={MAX_DIM}")));
    }
    if !coords.len().is_multiple_of(dim) {
        return Err(Error::Precondition("coordinate count is not a multiple of dim".into()));
    }
    let n = coords.len() / dim;
    if n < dim + 1 {
        return Err(Error::Precondition(format!(
            "need at least {} points in dimension {dim}, got {n}",
            dim + 1
        )));
    }
    Ok(n)
}

/// Greedy affinely independent seed: repeatedly picks the point with the
/// largest residual against the span of the points chosen so far.
fn initial_simplex(pts: &Points, tol_abs: f64) -> Option<Vec<usize>> {
    let d = pts.dim;
    let n = pts.n();
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = pts.point(0).to_vec();

    while chosen.len() < d + 1 {
        let mut best = (0usize, -1.0f64, Vec::new());
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let mut v: Vec<f64> = pts.point(i).iter().zip(&origin).map(|(a, b)| a - b).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (vj, bj) in v.iter_mut().zip(b) {
                    *vj -= dot * bj;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > best.1 {
                best = (i, norm, v);
            }
        }
        if best.1 <= tol_abs {
            return None;
        }
        for x in best.2.iter_mut() {
            *x /= best.1;
        }
        basis.push(best.2);
        chosen.push(best.0);
    }
    Some(chosen)
}

#[derive(Debug, Clone)]
struct Facet {
    verts: Vec<usize>,
    sign: f64,
}

/// Enumerates the facets of conv(points) by incremental insertion.
pub fn hull_facets(coords: &[f64], dim: usize, tol: f64) -> Result<HullSummary> {
    let n = check_input(coords, dim)?;
    let pts = Points { coords, dim };
    let scale = coords.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut degenerate = false;

    let seed = match initial_simplex(&pts, tol * scale) {
        Some(s) => s,
        None => {
            return Ok(HullSummary { d: dim, n, facets: Vec::new(), degenerate: true });
        }
    };

    let mut interior = vec![0.0f64; dim];
    for &i in &seed {
        for (c, v) in interior.iter_mut().zip(pts.point(i)) {
            *c += v / (dim as f64 + 1.0);
        }
    }

    let mut facets: Vec<Facet> = Vec::new();
    for skip in 0..seed.len() {
        let mut verts: Vec<usize> =
            seed.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| i).collect();
        verts.sort_unstable();
        let (det, hscale) = orientation(&pts, &verts, &interior);
        if det.abs() <= tol * hscale {
            degenerate = true;
        }
        let sign = if det > 0.0 { -1.0 } else { 1.0 };
        facets.push(Facet { verts, sign });
    }

    let mut in_seed = vec![false; n];
    for &i in &seed {
        in_seed[i] = true;
    }

    let mut visible: Vec<usize> = Vec::new();
    for p in (0..n).filter(|&p| !in_seed[p]) {
        let q = pts.point(p);
        visible.clear();
        for (fi, facet) in facets.iter().enumerate() {
            let (det, hscale) = orientation(&pts, &facet.verts, q);
            let side = facet.sign * det;
            if side.abs() <= tol * hscale {
                degenerate = true;
            } else if side > 0.0 {
                visible.push(fi);
            }
        }
        if visible.is_empty() {
            continue; // beneath every facet: interior point
        }

        // horizon = ridges covered exactly once by the visible facets
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            let verts = &facets[fi].verts;
            for skip in 0..verts.len() {
                let mut ridge = Vec::with_capacity(dim - 1);
                ridge.extend(verts.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v));
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }

        // drop visible facets (descending order keeps swap_remove indices valid)
        for &fi in visible.iter().rev() {
            facets.swap_remove(fi);
        }

        for (ridge, count) in ridge_count {
            if count != 1 {
                continue;
            }
            let mut verts = ridge;
            let pos = verts.partition_point(|&v| v < p);
            verts.insert(pos, p);
            let (det, hscale) = orientation(&pts, &verts, &interior);
            if det.abs() <= tol * hscale {
                degenerate = true;
            }
            let sign = if det > 0.0 { -1.0 } else { 1.0 };
            facets.push(Facet { verts, sign });
        }
    }

    let mut sets: Vec<Vec<usize>> = facets.into_iter().map(|f| f.verts).collect();
    sets.sort_unstable();
    Ok(HullSummary { d: dim, n, facets: sets, degenerate })
}

/// Brute-force facet enumeration: a d-subset spans a facet exactly when all
/// remaining points lie strictly in one open half-space of its affine hull.
/// Exponential in d; intended for n up to roughly 30 as a correctness oracle.
pub fn facet_oracle(coords: &[f64], dim: usize, tol: f64) -> Result<HullSummary> {
    let n = check_input(coords, dim)?;
    let pts = Points { coords, dim };
    let mut degenerate = false;
    let mut sets: Vec<Vec<usize>> = Vec::new();

    let mut combo: Vec<usize> = (0..dim).collect();
    loop {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for q in 0..n {
            if combo.contains(&q) {
                continue;
            }
            let (det, hscale) = orientation(&pts, &combo, pts.point(q));
            if det.abs() <= tol * hscale {
                degenerate = true;
                pos += 1;
                neg += 1; // near-tie disqualifies strict separation
            } else if det > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
            if pos > 0 && neg > 0 {
                break;
            }
        }
        if pos == 0 || neg == 0 {
            sets.push(combo.clone());
        }

        // next lexicographic combination
        let mut i = dim;
        loop {
            if i == 0 {
                combo.clear();
                break;
            }
            i -= 1;
            if combo[i] != i + n - dim {
                combo[i] += 1;
                for j in (i + 1)..dim {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
        if combo.is_empty() {
            break;
        }
    }

    sets.sort_unstable();
    Ok(HullSummary { d: dim, n, facets: sets, degenerate })
}

/// Post-hoc check that every facet separates the remaining cloud strictly.
pub fn validate_summary(summary: &HullSummary, coords: &[f64], dim: usize, tol: f64) -> bool {
    let pts = Points { coords, dim };
    let n = pts.n();
    for facet in &summary.facets {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for q in 0..n {
            if facet.contains(&q) {
                continue;
            }
            let (det, hscale) = orientation(&pts, facet, pts.point(q));
            if det.abs() <= tol * hscale {
                return false;
            }
            if det > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        if pos > 0 && neg > 0 {
            return false;
        }
    }
    true
}
