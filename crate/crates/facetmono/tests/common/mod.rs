#![allow(dead_code)]
#![allow(clippy::type_complexity)]
#![allow(clippy::too_many_arguments)]

//! Shared oracles for the integration tests. Everything here is written
//! independently of the library's own numerics so that agreement between the
//! two is evidence, not tautology.

/// Adaptive Simpson quadrature with simple interval bisection.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fa = f(a);
        let fm = f(m);
        let fb = f(b);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fa, fm, fb)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, left, fa, flm, fm, 0.5 * tol, depth - 1)
                + rec(f, m, b, right, fm, frm, fb, 0.5 * tol, depth - 1)
        }
    }
    let (whole, fa, fm, fb) = simpson_rule(f, a, b);
    rec(f, a, b, whole, fa, fm, fb, tol, 48)
}

/// Root of a monotone increasing function on [lo, hi] by 128 plain
/// bisection steps.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..128 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: &F) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let fx = cdf(x);
        stat = stat.max((i as f64 + 1.0) / n - fx).max(fx - i as f64 / n);
    }
    stat
}

/// Centered five-point first derivative.
pub fn deriv1<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Centered five-point second derivative.
pub fn deriv2<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// Numerical Jacobian factor sqrt(det(Dg^T Dg)) of a map R^d -> R^{d+1} by
/// central differences.
pub fn jacobian_factor_fd<G: Fn(&[f64]) -> Vec<f64>>(g: &G, x: &[f64], h: f64) -> f64 {
    let d = x.len();
    let m = d + 1;
    // columns of Dg
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let gp = g(&xp);
        let gm = g(&xm);
        cols.push((0..m).map(|i| (gp[i] - gm[i]) / (2.0 * h)).collect());
    }
    // gram matrix Dg^T Dg
    let mut gram = vec![0.0f64; d * d];
    for a in 0..d {
        for b in 0..d {
            gram[a * d + b] = cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum();
        }
    }
    det(&mut gram, d).abs().sqrt()
}

/// Plain LU determinant with partial pivoting.
pub fn det(m: &mut [f64], d: usize) -> f64 {
    let mut result = 1.0f64;
    for k in 0..d {
        let mut piv = k;
        for r in (k + 1)..d {
            if m[r * d + k].abs() > m[piv * d + k].abs() {
                piv = r;
            }
        }
        if m[piv * d + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..d {
                m.swap(k * d + c, piv * d + c);
            }
            result = -result;
        }
        let p = m[k * d + k];
        result *= p;
        for r in (k + 1)..d {
            let factor = m[r * d + k] / p;
            for c in (k + 1)..d {
                m[r * d + c] -= factor * m[k * d + c];
            }
        }
    }
    result
}

use facetmono::DistributionSpec;

/// The parameter grid used by the cross-validation suites.
pub fn acceptance_grid() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::heavy_tail(2, 2.0, 1.0).unwrap(),
        DistributionSpec::heavy_tail(3, 3.0, 1.0).unwrap(),
        DistributionSpec::beta_ball(2, 0.0, 1.0).unwrap(),
        DistributionSpec::beta_ball(3, 1.0, 1.0).unwrap(),
        DistributionSpec::sphere_uniform(3, 1.0).unwrap(),
        DistributionSpec::gaussian(2, 1.0).unwrap(),
        DistributionSpec::gaussian(3, 1.0).unwrap(),
    ]
}
