//! Expected facet numbers by two independent routes.
//!
//! The Monte Carlo route samples clouds, counts hull facets and averages.
//! The quadrature route evaluates the one-dimensional representation
//!
//! ```text
//!     P(first d points span a facet) = c * I(n),
//!     I(n) = int_0^1 (1-s)^{n-d} L(s)^{d-1} ds,
//! ```
//!
//! and lifts it with the binomial factor: E f_{d-1} = C(n,d) * c * I(n).
//! The constant c collects every normalization the derivation swallows; it
//! is pinned here by the exact identity P = 1 at n = d+1, so c = 1/I(d+1).
//!
//! A scan driver estimates a whole range of n, reports consecutive gaps and
//! checks strict monotonicity. For the quadrature method it additionally
//! evaluates the difference representation
//!
//! ```text
//!     E f(n) - E f(n-1) = c * int_0^1 [C(n,d)(1-s) - C(n-1,d)]
//!                                     (1-s)^{n-d-1} L(s)^{d-1} ds
//! ```
//!
//! directly and cross-checks it against the gap of the two estimates.

use crate::distributions::{Class, DistributionSpec};
use crate::error::{Error, Result};
use crate::hull::{hull_facets, DEFAULT_HULL_TOL};
use crate::marginals::MarginalModel;
use crate::quad::{integrate_unit, QuadResult};
use crate::special::binomial;
use crate::sphere;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

/// Retry cap for degenerate Monte Carlo replicates. Degeneracy has
/// probability zero for the continuous inputs here, so repeated hits point
/// at a bug rather than bad luck.
pub const MAX_RESAMPLES: u32 = 10;

/// Relative tolerance of the calibration integral I(d+1).
const CAL_REL_TOL: f64 = 1e-13;
/// Relative floor of every other quadrature in this module.
const QUAD_REL_TOL: f64 = 1e-12;

/// Estimation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "mc")]
    Mc,
    #[serde(rename = "quad")]
    Quad,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Mc => "mc",
            Method::Quad => "quad",
        })
    }
}

/// One estimate of E f_{d-1}(P_n) (or of a facet probability).
///
/// `error` is the standard error of the mean for Monte Carlo and an absolute
/// error bound for quadrature; `effort` counts replicates or integrand
/// evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub effort: u64,
    pub spec: DistributionSpec,
    pub n: usize,
}

/// Scan configuration: which route and how much effort per n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMethod {
    Mc { replicates: u64 },
    Quad { abs_tol: f64 },
}

impl ScanMethod {
    pub fn method(&self) -> Method {
        match self {
            ScanMethod::Mc { .. } => Method::Mc,
            ScanMethod::Quad { .. } => Method::Quad,
        }
    }
}

fn serialize_rows<S: Serializer>(
    estimates: &[Estimate],
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        value: f64,
        error: f64,
        effort: u64,
    }
    ser.collect_seq(estimates.iter().map(|e| Row {
        n: e.n,
        value: e.value,
        error: e.error,
        effort: e.effort,
    }))
}

/// Per-n estimates over a range, their consecutive gaps, and the
/// monotonicity verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub spec: DistributionSpec,
    pub method: Method,
    pub seed: u64,
    #[serde(rename = "rows", serialize_with = "serialize_rows")]
    pub estimates: Vec<Estimate>,
    pub gaps: Vec<f64>,
    /// True when every gap is positive and exceeds the combined numerical
    /// error of its two estimates (4 combined standard errors for Monte
    /// Carlo, the summed error bounds for quadrature).
    pub monotone: bool,
    pub degenerate_resamples: u64,
}

impl ScanReport {
    pub fn n_values(&self) -> Vec<usize> {
        self.estimates.iter().map(|e| e.n).collect()
    }

    /// Pretty JSON in the report schema
    /// `{spec, method, seed, rows, gaps, monotone, degenerate_resamples}`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// CSV mirror: configuration in `#` comment lines, then
    /// `n,value,error,effort` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let spec = &self.spec;
        out.push_str(&format!("# class={} d={}", spec.class(), spec.dim()));
        if let Some(beta) = spec.beta() {
            out.push_str(&format!(" beta={beta}"));
        }
        if let Some(alpha) = spec.alpha() {
            out.push_str(&format!(" alpha={alpha}"));
        }
        out.push_str(&format!(" sigma={}\n", spec.sigma()));
        out.push_str(&format!(
            "# method={} seed={} monotone={} degenerate_resamples={}\n",
            self.method, self.seed, self.monotone, self.degenerate_resamples
        ));
        out.push_str("n,value,error,effort\n");
        for e in &self.estimates {
            out.push_str(&format!("{},{},{},{}\n", e.n, e.value, e.error, e.effort));
        }
        out
    }

    /// Wraps a single estimate in the common report shape.
    pub fn single(estimate: Estimate, seed: u64, degenerate_resamples: u64) -> Self {
        ScanReport {
            spec: estimate.spec,
            method: estimate.method,
            seed,
            estimates: vec![estimate],
            gaps: Vec::new(),
            monotone: true,
            degenerate_resamples,
        }
    }
}

/// Facet count of one replicate, resampling degenerate draws from fresh
/// derived streams.
fn replicate_facets(
    spec: &DistributionSpec,
    n: usize,
    seed: u64,
    replicate: u64,
) -> Result<(u32, u32)> {
    let d = spec.dim();
    for retry in 0..=MAX_RESAMPLES {
        let cloud = spec.sample_replicate(n, seed, replicate, retry)?;
        let hull = if spec.class() == Class::S {
            match sphere::euclidean_cloud(&cloud) {
                Ok(flat) => hull_facets(&flat, d, DEFAULT_HULL_TOL)?,
                // an equator-grazing sample projects badly: resample
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        } else {
            hull_facets(cloud.coords(), d, DEFAULT_HULL_TOL)?
        };
        if !hull.degenerate {
            return Ok((hull.facet_count() as u32, retry));
        }
    }
    Err(Error::DegenerateReplicate { replicate, retries: MAX_RESAMPLES })
}

/// Monte Carlo estimate of E f_{d-1}(P_n) plus the number of degenerate
/// resamples that occurred.
///
/// Replicate r always draws from the stream derived from (seed, r), and the
/// results are reduced in replicate order, so the output is bitwise
/// identical for any rayon worker count.
pub fn expect_mc_detailed(
    spec: &DistributionSpec,
    n: usize,
    replicates: u64,
    seed: u64,
) -> Result<(Estimate, u64)> {
    let d = spec.dim();
    if n < d + 1 {
        return Err(Error::Precondition(format!("need n >= d+1 = {}, got {n}", d + 1)));
    }
    if replicates < 2 {
        return Err(Error::Precondition("need at least 2 replicates".into()));
    }
    let outcomes: Vec<(u32, u32)> = (0..replicates)
        .into_par_iter()
        .map(|r| replicate_facets(spec, n, seed, r))
        .collect::<Result<Vec<_>>>()?;

    let resamples: u64 = outcomes.iter().map(|&(_, retries)| retries as u64).sum();
    let total: u64 = outcomes.iter().map(|&(count, _)| count as u64).sum();
    let mean = total as f64 / replicates as f64;
    let ss: f64 = outcomes
        .iter()
        .map(|&(count, _)| {
            let dev = count as f64 - mean;
            dev * dev
        })
        .sum();
    let stderr = if replicates > 1 {
        (ss / ((replicates - 1) as f64 * replicates as f64)).sqrt()
    } else {
        f64::NAN
    };
    let estimate = Estimate {
        value: mean,
        error: stderr,
        method: Method::Mc,
        effort: replicates,
        spec: *spec,
        n,
    };
    Ok((estimate, resamples))
}

/// Monte Carlo estimate of E f_{d-1}(P_n).
pub fn expect_mc(spec: &DistributionSpec, n: usize, replicates: u64, seed: u64) -> Result<Estimate> {
    expect_mc_detailed(spec, n, replicates, seed).map(|(e, _)| e)
}

/// Evaluates kernels inside infallible quadrature closures; any kernel error
/// surfaces as NaN and trips the integrator's finiteness guard.
fn kernel_or_nan(model: &MarginalModel, s: f64) -> f64 {
    model.kernel(s).unwrap_or(f64::NAN)
}

/// Calibrated quadrature context for one spec: the marginal model plus the
/// calibration integral I(d+1).
pub struct QuadContext {
    model: MarginalModel,
    d: usize,
    cal: QuadResult,
}

impl QuadContext {
    pub fn new(spec: &DistributionSpec) -> Result<Self> {
        if spec.class() == Class::S {
            return Err(Error::Precondition(
                "quadrature needs class G, H, B or U; route class S through its \
                 heavy-tailed equivalent"
                    .into(),
            ));
        }
        let model = MarginalModel::new(spec)?;
        let d = spec.dim();
        let cal = Self::raw_integral(&model, d, d + 1, 0.0, CAL_REL_TOL)?;
        if !(cal.value > 0.0) {
            return Err(Error::Numeric("calibration integral is not positive".into()));
        }
        Ok(QuadContext { model, d, cal })
    }

    /// I(n) = int_0^1 (1-s)^{n-d} L(s)^{d-1} ds.
    fn raw_integral(
        model: &MarginalModel,
        d: usize,
        n: usize,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<QuadResult> {
        let damp = (n - d) as i32;
        let power = (d - 1) as i32;
        integrate_unit(
            |s, oms| oms.powi(damp) * kernel_or_nan(model, s).powi(power),
            abs_tol,
            rel_tol,
        )
    }

    /// Facet probability P = I(n)/I(d+1) with an absolute error budget.
    pub fn probability(&self, n: usize, abs_tol: f64) -> Result<Estimate> {
        if n < self.d + 1 {
            return Err(Error::Precondition(format!(
                "need n >= d+1 = {}, got {n}",
                self.d + 1
            )));
        }
        let spec = *self.model.spec();
        if n == self.d + 1 {
            // P(facet) = 1 exactly: every d-subset of a simplex spans a facet
            return Ok(Estimate {
                value: 1.0,
                error: 2.0 * self.cal.error_bound / self.cal.value,
                method: Method::Quad,
                effort: 15 * self.cal.intervals as u64,
                spec,
                n,
            });
        }
        let budget = abs_tol * self.cal.value;
        let res = Self::raw_integral(&self.model, self.d, n, budget, QUAD_REL_TOL)?;
        let p = res.value / self.cal.value;
        let error = (res.error_bound + p * self.cal.error_bound) / self.cal.value;
        if error > abs_tol.max(3.0 * QUAD_REL_TOL * p) {
            return Err(Error::QuadratureNoConvergence { estimate: p, error_bound: error });
        }
        Ok(Estimate {
            value: p,
            error,
            method: Method::Quad,
            effort: 15 * (res.intervals + self.cal.intervals) as u64,
            spec,
            n,
        })
    }

    /// E f_{d-1}(P_n) = C(n,d) * P; `abs_tol` is on the expectation scale.
    pub fn expectation(&self, n: usize, abs_tol: f64) -> Result<Estimate> {
        let lift = binomial(n as u64, self.d as u64);
        let mut est = self.probability(n, abs_tol / lift)?;
        est.value *= lift;
        est.error *= lift;
        Ok(est)
    }

    /// The difference representation evaluated head-on:
    /// c * int [C(n,d)(1-s) - C(n-1,d)] (1-s)^{n-d-1} L^{d-1} ds,
    /// which must equal E f(n) - E f(n-1). Returns (value, error bound).
    pub fn difference(&self, n: usize, abs_tol: f64) -> Result<(f64, f64)> {
        if n < self.d + 2 {
            return Err(Error::Precondition("difference needs n >= d+2".into()));
        }
        let c_n = binomial(n as u64, self.d as u64);
        let c_prev = binomial(n as u64 - 1, self.d as u64);
        let damp = (n - self.d - 1) as i32;
        let power = (self.d - 1) as i32;
        let model = &self.model;
        let res = integrate_unit(
            |s, oms| {
                (c_n * oms - c_prev) * oms.powi(damp) * kernel_or_nan(model, s).powi(power)
            },
            abs_tol * self.cal.value,
            QUAD_REL_TOL,
        )?;
        let value = res.value / self.cal.value;
        let error = (res.error_bound + value.abs() * self.cal.error_bound) / self.cal.value;
        Ok((value, error))
    }
}

/// Facet probability by calibrated quadrature (classes G, H, B, U).
pub fn facet_probability_quad(spec: &DistributionSpec, n: usize, abs_tol: f64) -> Result<Estimate> {
    QuadContext::new(spec)?.probability(n, abs_tol)
}

/// Expected facet number by calibrated quadrature; `abs_tol` bounds the
/// absolute error of the returned expectation.
pub fn expect_quad(spec: &DistributionSpec, n: usize, abs_tol: f64) -> Result<Estimate> {
    QuadContext::new(spec)?.expectation(n, abs_tol)
}

/// Estimates E f_{d-1}(P_n) for every n in [n_min, n_max], reports the
/// consecutive gaps and whether they are all resolvably positive.
///
/// Class S runs natively for Monte Carlo (spherical hulls) and through the
/// heavy-tailed equivalence for quadrature; either way the report keeps the
/// spherical spec.
pub fn monotonicity_scan(
    spec: &DistributionSpec,
    n_min: usize,
    n_max: usize,
    method: ScanMethod,
    seed: u64,
) -> Result<ScanReport> {
    let d = spec.dim();
    if n_min < d + 1 || n_min >= n_max {
        return Err(Error::Precondition(format!(
            "need d+1 <= n_min < n_max, got d={d}, n_min={n_min}, n_max={n_max}"
        )));
    }

    let mut estimates = Vec::with_capacity(n_max - n_min + 1);
    let mut degenerate_resamples = 0u64;
    let mut monotone = true;

    match method {
        ScanMethod::Mc { replicates } => {
            for n in n_min..=n_max {
                let (est, resamples) = expect_mc_detailed(spec, n, replicates, seed)?;
                degenerate_resamples += resamples;
                estimates.push(est);
            }
            for pair in estimates.windows(2) {
                let gap = pair[1].value - pair[0].value;
                let combined =
                    4.0 * (pair[0].error * pair[0].error + pair[1].error * pair[1].error).sqrt();
                if !(gap > combined) {
                    monotone = false;
                }
            }
        }
        ScanMethod::Quad { abs_tol } => {
            let ctx = if spec.class() == Class::S {
                QuadContext::new(&sphere::heavy_tail_equivalent(spec)?)?
            } else {
                QuadContext::new(spec)?
            };
            // quadrature is pure, so the per-n work parallelizes freely; the
            // ordered collect keeps output independent of the worker count
            estimates = (n_min..=n_max)
                .into_par_iter()
                .map(|n| {
                    ctx.expectation(n, abs_tol).map(|mut est| {
                        est.spec = *spec;
                        est
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let differences: Vec<(f64, f64)> = (n_min + 1..=n_max)
                .into_par_iter()
                .map(|n| ctx.difference(n, abs_tol))
                .collect::<Result<Vec<_>>>()?;
            for (pair, &(diff, diff_err)) in estimates.windows(2).zip(&differences) {
                let n = pair[1].n;
                let gap = pair[1].value - pair[0].value;
                let combined = pair[0].error + pair[1].error;
                if !(gap > combined) {
                    monotone = false;
                }
                // the difference representation must agree with the gap and
                // must itself be positive
                if !(diff > diff_err) {
                    monotone = false;
                }
                let slack = combined
                    + diff_err
                    + 1e-11 * (pair[0].value.abs() + pair[1].value.abs());
                if (diff - gap).abs() > slack {
                    return Err(Error::Numeric(format!(
                        "difference integral {diff} disagrees with gap {gap} at n={n} \
                         (slack {slack:.3e})"
                    )));
                }
            }
        }
    }

    let gaps = estimates.windows(2).map(|p| p[1].value - p[0].value).collect();
    Ok(ScanReport {
        spec: *spec,
        method: method.method(),
        seed,
        estimates,
        gaps,
        monotone,
        degenerate_resamples,
    })
}

/// Non-negative weight functions h for the concavity gap integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFn {
    /// h(s) = a
    Constant(f64),
    /// h(s) = (1-s)^k
    OneMinusPow(u32),
    /// h(s) = s^a (1-s)^b, a, b > -1
    BetaShape { a: f64, b: f64 },
}

impl WeightFn {
    fn eval(&self, s: f64, oms: f64) -> f64 {
        match *self {
            WeightFn::Constant(a) => a,
            WeightFn::OneMinusPow(k) => oms.powi(k as i32),
            WeightFn::BetaShape { a, b } => s.powf(a) * oms.powf(b),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightFn::Constant(a) => a > 0.0 && a.is_finite(),
            WeightFn::OneMinusPow(_) => true,
            WeightFn::BetaShape { a, b } => a > -1.0 && b > -1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid weight function {self:?}")))
        }
    }
}

/// A linear function with negative slope and its root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRamp {
    pub slope: f64,
    pub root: f64,
}

impl LinearRamp {
    pub fn new(slope: f64, root: f64) -> Result<Self> {
        if !(slope < 0.0) || !slope.is_finite() {
            return Err(Error::Precondition("slope must be negative".into()));
        }
        if !(root > 0.0 && root <= 1.0) {
            return Err(Error::Precondition("root must lie in (0, 1]".into()));
        }
        Ok(LinearRamp { slope, root })
    }

    fn eval(&self, s: f64) -> f64 {
        self.slope * (s - self.root)
    }
}

/// Kernel argument of [`concavity_gap`]: either a strictly concave marginal
/// kernel or the linear stand-in (the equality case of the bound).
#[derive(Clone, Copy)]
pub enum GapKernel<'a> {
    Concave(&'a MarginalModel),
    Linear,
}

/// The concavity gap
///
/// ```text
///     int_0^1 h g L^{d-1} ds  -  int_0^1 h g ell^{d-1} ds,
///     ell(s) = (L(s*)/s*) s,
/// ```
///
/// which is strictly positive whenever h is nonneg and not a.e. zero, g is
/// linear with negative slope and root s* in (0,1], and L is positive and
/// strictly concave. With the linear stand-in the gap is identically zero.
pub fn concavity_gap(h: &WeightFn, g: &LinearRamp, kernel: GapKernel, d: usize) -> Result<f64> {
    h.validate()?;
    if d < 2 {
        return Err(Error::Precondition("need d >= 2".into()));
    }
    let power = (d - 1) as i32;

    let eval_l: Box<dyn Fn(f64) -> f64> = match kernel {
        GapKernel::Concave(model) => {
            // reject kernels that are not strictly concave
            for i in 1..20 {
                let s = i as f64 / 20.0;
                if !(model.kernel_d2(s)? < 0.0) {
                    return Err(Error::Precondition(format!(
                        "kernel is not strictly concave at s={s}"
                    )));
                }
            }
            let model = *model;
            Box::new(move |s| kernel_or_nan(&model, s))
        }
        GapKernel::Linear => Box::new(|s| s),
    };

    let l_star = eval_l(g.root);
    if !(l_star > 0.0) {
        return Err(Error::Precondition("kernel must be positive at the root".into()));
    }
    let ell_scale = l_star / g.root;

    let with_l = integrate_unit(
        |s, oms| h.eval(s, oms) * g.eval(s) * eval_l(s).powi(power),
        1e-13,
        1e-11,
    )?;
    let with_ell = integrate_unit(
        |s, oms| h.eval(s, oms) * g.eval(s) * (ell_scale * s).powi(power),
        1e-13,
        1e-11,
    )?;
    Ok(with_l.value - with_ell.value)
}
