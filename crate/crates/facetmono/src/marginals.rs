//! One-dimensional marginals of the distribution classes.
//!
//! By rotational symmetry the projection of a cloud onto any line has the
//! same law as the first coordinate. The marginal of the heavy-tailed class
//! in dimension d with exponent beta is again heavy-tailed with the reduced
//! exponent beta - (d-1)/2, the marginal of the ball class is a beta law on
//! [-1,1] with exponent beta + (d-1)/2, and the marginal of the uniform
//! sphere is the beta law with exponent (d-3)/2. Scale is fixed to 1: facet
//! counts are invariant under rescaling, so nothing is lost.
//!
//! The model also evaluates the transformed kernel
//!
//! ```text
//!     L(s) = f(F^{-1}(s)) * psi(F^{-1}(s)),   s in (0, 1),
//! ```
//!
//! with psi(h) = sqrt(1 + h^2) for the heavy-tailed class, sqrt(1 - h^2) for
//! the bounded classes and 1 for the Gaussian. L is the integrand kernel of
//! the one-dimensional facet-probability representation; its strict concavity
//! is what the monotonicity argument rests on.

use crate::distributions::{ln_c_beta_ball, ln_c_heavy, Class, DistributionSpec};
use crate::error::{Error, Result};
use crate::special::{beta_reg, normal_cdf, normal_pdf, LN_SQRT_2PI};

/// Tail mass below which quantiles are refused rather than saturated.
const TAIL_FLOOR: f64 = 1e-300;
/// Largest magnitude a heavy-tail quantile may reach before the range error.
const QUANTILE_CAP: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Standard normal marginal.
    Gaussian,
    /// Density c1 (1 + x^2)^{-beta1} on the whole line, beta1 > 1/2.
    HeavyTail { beta1: f64 },
    /// Density c1 (1 - x^2)^{beta1} on [-1, 1], beta1 > -1.
    Bounded { beta1: f64 },
}

/// Marginal density / distribution / quantile / kernel bundle for one spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalModel {
    spec: DistributionSpec,
    kind: Kind,
    /// ln of the marginal normalization constant c1.
    ln_norm: f64,
}

impl MarginalModel {
    /// Builds the marginal model of `spec` with the scale normalized to 1.
    /// Class S has no Euclidean marginal; route it through its heavy-tailed
    /// equivalent first (see the sphere module).
    pub fn new(spec: &DistributionSpec) -> Result<Self> {
        let spec = spec.with_unit_sigma();
        let d = spec.dim() as f64;
        let (kind, ln_norm) = match spec.class() {
            Class::G => (Kind::Gaussian, -LN_SQRT_2PI),
            Class::H => {
                let beta1 = spec.beta().expect("H carries beta") - (d - 1.0) / 2.0;
                (Kind::HeavyTail { beta1 }, ln_c_heavy(1, beta1))
            }
            Class::B => {
                let beta1 = spec.beta().expect("B carries beta") + (d - 1.0) / 2.0;
                (Kind::Bounded { beta1 }, ln_c_beta_ball(1, beta1))
            }
            Class::U => {
                let beta1 = (d - 3.0) / 2.0;
                (Kind::Bounded { beta1 }, ln_c_beta_ball(1, beta1))
            }
            Class::S => {
                return Err(Error::Precondition(
                    "class S has no 1-D marginal; use its heavy-tailed equivalent".into(),
                ))
            }
        };
        Ok(Self { spec, kind, ln_norm })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Support interval of the marginal density.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            Kind::Bounded { .. } => (-1.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Marginal density at `x`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::Gaussian => Ok(normal_pdf(x)),
            Kind::HeavyTail { beta1 } => Ok((self.ln_norm - beta1 * (x * x).ln_1p()).exp()),
            Kind::Bounded { beta1 } => {
                let t = (1.0 - x) * (1.0 + x);
                if t < 0.0 {
                    return Err(Error::Domain(format!("{x} outside the support [-1,1]")));
                }
                if t == 0.0 {
                    return Ok(if beta1 > 0.0 {
                        0.0
                    } else if beta1 == 0.0 {
                        self.ln_norm.exp()
                    } else {
                        f64::INFINITY
                    });
                }
                Ok((self.ln_norm + beta1 * t.ln()).exp())
            }
        }
    }

    /// Marginal distribution function; exact 0/1 outside the support.
    ///
    /// The bounded and heavy-tailed cases reduce to the regularized
    /// incomplete beta function through t = x^2 and t = x^2/(1+x^2); both are
    /// evaluated through the complementary argument so that small tail masses
    /// keep full relative precision.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::Gaussian => Ok(normal_cdf(x)),
            Kind::HeavyTail { beta1 } => {
                let w = 1.0 / (1.0 + x * x);
                let tail = 0.5 * beta_reg(beta1 - 0.5, 0.5, w)?;
                Ok(if x <= 0.0 { tail } else { 1.0 - tail })
            }
            Kind::Bounded { beta1 } => {
                if x <= -1.0 {
                    return Ok(0.0);
                }
                if x >= 1.0 {
                    return Ok(1.0);
                }
                let w = (1.0 - x) * (1.0 + x);
                let tail = 0.5 * beta_reg(beta1 + 1.0, 0.5, w)?;
                Ok(if x <= 0.0 { tail } else { 1.0 - tail })
            }
        }
    }

    /// Inverse of [`cdf`](Self::cdf) on (0, 1).
    pub fn quantile(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("quantile needs s in (0,1), got {s}")));
        }
        if s == 0.5 {
            return Ok(0.0);
        }
        // all four marginals are symmetric: F^{-1}(s) = -F^{-1}(1-s)
        let flip = s > 0.5;
        let sl = if flip { 1.0 - s } else { s };
        if sl < TAIL_FLOOR {
            return Err(Error::Range(format!(
                "tail mass {sl:.3e} is below the {TAIL_FLOOR:.0e} quantile floor"
            )));
        }
        let x = self.left_tail_quantile(sl)?;
        Ok(if flip { -x } else { x })
    }

    /// Solves F(x) = sl for sl <= 1/2 (so x <= 0) by safeguarded Newton.
    fn left_tail_quantile(&self, sl: f64) -> Result<f64> {
        let (mut lo, mut hi) = match self.kind {
            Kind::Gaussian => (-40.0, 0.0),
            Kind::Bounded { .. } => (-1.0, 0.0),
            Kind::HeavyTail { beta1 } => {
                // asymptotic tail: F(x) ~ c1 |x|^{1-2 beta1} / (2 beta1 - 1)
                let ln_absx =
                    (((2.0 * beta1 - 1.0) * sl).ln() - self.ln_norm) / (1.0 - 2.0 * beta1);
                if ln_absx > QUANTILE_CAP.ln() {
                    return Err(Error::Range(format!(
                        "quantile for tail mass {sl:.3e} exceeds {QUANTILE_CAP:.0e}"
                    )));
                }
                let guess = -ln_absx.exp().max(1.0);
                (4.0 * guess, guess.mul_add(0.25, 0.0).min(-0.0))
            }
        };
        // make sure the bracket actually contains the root
        for _ in 0..80 {
            if self.cdf(lo)? <= sl {
                break;
            }
            lo *= 2.0;
            if lo < -QUANTILE_CAP {
                return Err(Error::Range(format!(
                    "quantile for tail mass {sl:.3e} exceeds {QUANTILE_CAP:.0e}"
                )));
            }
        }
        if self.cdf(hi)? < sl {
            hi = 0.0;
        }

        let mut x = self.initial_guess(sl, lo, hi);
        let tol = sl * 1e-13;
        for _ in 0..100 {
            let fx = self.cdf(x)? - sl;
            if fx.abs() <= tol {
                return Ok(x);
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.pdf(x)?;
            let newton = if slope > 0.0 && slope.is_finite() { x - fx / slope } else { f64::NAN };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
        }
        Ok(x)
    }

    fn initial_guess(&self, sl: f64, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        match self.kind {
            Kind::Gaussian => {
                if sl > 0.1 {
                    (sl - 0.5) * (2.0 * std::f64::consts::PI).sqrt()
                } else {
                    // invert the tail expansion Phi(x) ~ phi(x)/|x|
                    let mut ax = 1.0f64;
                    for _ in 0..4 {
                        ax = (2.0 * (-sl.ln() - LN_SQRT_2PI - ax.ln())).max(1e-8).sqrt();
                    }
                    (-ax).clamp(lo, hi)
                }
            }
            Kind::Bounded { beta1 } => {
                // F(x) ~ c1 2^{beta1} (1+x)^{beta1+1} / (beta1+1) near x = -1
                let ln_1px = ((sl * (beta1 + 1.0)).ln()
                    - self.ln_norm
                    - beta1 * std::f64::consts::LN_2)
                    / (beta1 + 1.0);
                let x = ln_1px.exp() - 1.0;
                if x > -1.0 && x < 0.0 {
                    x
                } else {
                    mid
                }
            }
            Kind::HeavyTail { .. } => mid,
        }
    }

    /// Transformed kernel L(s) = f(F^{-1}(s)) psi(F^{-1}(s)).
    pub fn kernel(&self, s: f64) -> Result<f64> {
        let h = self.quantile(s)?;
        Ok(match self.kind {
            Kind::Gaussian => normal_pdf(h),
            // f * psi = c1 (1+h^2)^{-beta1} (1+h^2)^{1/2}
            Kind::HeavyTail { beta1 } => (self.ln_norm + (0.5 - beta1) * (h * h).ln_1p()).exp(),
            // f * psi = c1 (1-h^2)^{beta1 + 1/2}
            Kind::Bounded { beta1 } => {
                let t = (1.0 - h) * (1.0 + h);
                (self.ln_norm + (beta1 + 0.5) * t.ln()).exp()
            }
        })
    }

    /// First derivative of the kernel.
    ///
    /// With h = F^{-1}(s) and h'(s) = 1/f(h), the chain rule collapses the
    /// normalization constant: L'(s) = (d/dh)[f psi](h) / f(h).
    pub fn kernel_d1(&self, s: f64) -> Result<f64> {
        let h = self.quantile(s)?;
        Ok(match self.kind {
            Kind::Gaussian => -h,
            Kind::HeavyTail { beta1 } => (1.0 - 2.0 * beta1) * h / (1.0 + h * h).sqrt(),
            Kind::Bounded { beta1 } => {
                let t = (1.0 - h) * (1.0 + h);
                -(2.0 * beta1 + 1.0) * h / t.sqrt()
            }
        })
    }

    /// Second derivative of the kernel; strictly negative on (0,1) for every
    /// admissible parameter except the uniform circle (d = 2), where the
    /// kernel is constant and the second derivative vanishes identically.
    pub fn kernel_d2(&self, s: f64) -> Result<f64> {
        let h = self.quantile(s)?;
        Ok(match self.kind {
            // L'(s) = -h, so L''(s) = -h'(s) = -1/phi(h)
            Kind::Gaussian => -normal_pdf(h).recip(),
            // L''(s) = -(2 beta1 - 1)/c1 * (1+h^2)^{beta1 - 3/2}
            Kind::HeavyTail { beta1 } => {
                -(2.0 * beta1 - 1.0) * (-self.ln_norm + (beta1 - 1.5) * (h * h).ln_1p()).exp()
            }
            // L''(s) = -(2 beta1 + 1)/c1 * (1-h^2)^{-beta1 - 3/2}
            Kind::Bounded { beta1 } => {
                let t = (1.0 - h) * (1.0 + h);
                -(2.0 * beta1 + 1.0) * (-self.ln_norm - (beta1 + 1.5) * t.ln()).exp()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(spec: Result<DistributionSpec>) -> MarginalModel {
        MarginalModel::new(&spec.unwrap()).unwrap()
    }

    #[test]
    fn pdf_reference_values() {
        // uniform sphere, d=3: the projection is uniform on [-1,1]
        let u3 = model(DistributionSpec::sphere_uniform(3, 1.0));
        assert_relative_eq!(u3.pdf(0.3).unwrap(), 0.5, max_relative = 1e-13);
        // heavy tail d=2, beta=2: pi^{-1/2} Gamma(3/2)/Gamma(1) (1+x^2)^{-3/2}
        let h = model(DistributionSpec::heavy_tail(2, 2.0, 1.0));
        assert_relative_eq!(h.pdf(0.0).unwrap(), 0.5, max_relative = 1e-13);
        // uniform disk d=2: semicircle marginal, at 0: 2/pi
        let b = model(DistributionSpec::beta_ball(2, 0.0, 1.0));
        assert_relative_eq!(
            b.pdf(0.0).unwrap(),
            2.0 / std::f64::consts::PI,
            max_relative = 1e-13
        );
        assert!(b.pdf(1.5).is_err());
    }

    #[test]
    fn closure_under_projection() {
        // the d-dimensional heavy-tail marginal equals the 1-D heavy-tail
        // density with exponent beta - (d-1)/2
        let m = model(DistributionSpec::heavy_tail(4, 3.3, 1.0));
        let beta1 = 3.3 - 1.5;
        let c1 = (ln_c_heavy(1, beta1)).exp();
        for x in [-2.0f64, -0.3, 0.0, 0.7, 5.0] {
            let direct = c1 * (1.0 + x * x).powf(-beta1);
            assert_relative_eq!(m.pdf(x).unwrap(), direct, max_relative = 1e-12);
        }
        // same closure for the ball class with beta + (d-1)/2
        let m = model(DistributionSpec::beta_ball(3, 0.7, 1.0));
        let beta1 = 0.7 + 1.0;
        let c1 = (ln_c_beta_ball(1, beta1)).exp();
        for x in [-0.9f64, -0.2, 0.0, 0.4, 0.99] {
            let direct = c1 * (1.0 - x * x).powf(beta1);
            assert_relative_eq!(m.pdf(x).unwrap(), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn cdf_reference_values() {
        let u3 = model(DistributionSpec::sphere_uniform(3, 1.0));
        // constant density 1/2 integrates to (1+x)/2
        assert_relative_eq!(u3.cdf(0.4).unwrap(), 0.7, max_relative = 1e-13);
        assert_eq!(u3.cdf(-1.0).unwrap(), 0.0);
        assert_eq!(u3.cdf(2.0).unwrap(), 1.0);
        // symmetry at the origin
        for spec in [
            DistributionSpec::gaussian(2, 1.0),
            DistributionSpec::heavy_tail(2, 2.0, 1.0),
            DistributionSpec::beta_ball(2, 0.0, 1.0),
            DistributionSpec::sphere_uniform(4, 1.0),
        ] {
            assert_relative_eq!(model(spec).cdf(0.0).unwrap(), 0.5, max_relative = 1e-14);
        }
        // heavy tail d=2 beta=2 has the closed form F(x) = (1 + x/sqrt(1+x^2))/2
        let h = model(DistributionSpec::heavy_tail(2, 2.0, 1.0));
        for x in [-3.0f64, -1.0, 0.5, 1.0, 10.0] {
            let exact = 0.5 * (1.0 + x / (1.0 + x * x).sqrt());
            assert_relative_eq!(h.cdf(x).unwrap(), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn quantile_round_trip() {
        let specs = [
            DistributionSpec::gaussian(2, 1.0),
            DistributionSpec::heavy_tail(2, 2.0, 1.0),
            DistributionSpec::heavy_tail(3, 1.6, 1.0),
            DistributionSpec::beta_ball(2, 0.0, 1.0),
            DistributionSpec::beta_ball(3, -0.5, 1.0),
            DistributionSpec::sphere_uniform(2, 1.0),
            DistributionSpec::sphere_uniform(3, 1.0),
        ];
        for spec in specs {
            let m = model(spec);
            let mut s = 1e-6;
            while s < 1.0 - 1e-7 {
                let x = m.quantile(s).unwrap();
                let back = m.cdf(x).unwrap();
                // one-ulp quantization of x near a support edge moves F by
                // pdf(x) * ulp(x); that floor is unbeatable in f64
                let floor = 4.0 * m.pdf(x).unwrap() * f64::EPSILON * x.abs().max(1.0);
                let tol = 1e-12f64.max(floor).min(1e-10);
                assert!(
                    (back - s).abs() <= tol,
                    "spec {:?} s={s}: F(Finv) = {back}",
                    m.spec()
                );
                s += 0.0073;
            }
            // monotone in s
            assert!(m.quantile(0.2).unwrap() < m.quantile(0.4).unwrap());
        }
    }

    #[test]
    fn quantile_examples() {
        let u3 = model(DistributionSpec::sphere_uniform(3, 1.0));
        assert_relative_eq!(u3.quantile(0.75).unwrap(), 0.5, epsilon = 1e-12);
        for spec in [
            DistributionSpec::gaussian(3, 1.0),
            DistributionSpec::heavy_tail(2, 3.0, 1.0),
            DistributionSpec::beta_ball(2, 1.0, 1.0),
        ] {
            assert_eq!(model(spec).quantile(0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn quantile_domain_and_range_errors() {
        let m = model(DistributionSpec::heavy_tail(2, 2.0, 1.0));
        assert!(matches!(m.quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(m.quantile(1.0), Err(Error::Domain(_))));
        // beta barely above d/2: tails are so heavy that even the 10% tail
        // quantile lies beyond 1e300 (|x| ~ 10^349 analytically)
        let edge = model(DistributionSpec::heavy_tail(2, 1.001, 1.0));
        assert!(matches!(edge.quantile(0.9), Err(Error::Range(_))));
        assert!(matches!(edge.quantile(1e-250), Err(Error::Range(_))));
        // the representable central range still works
        let x = edge.quantile(0.55).unwrap();
        assert!((edge.cdf(x).unwrap() - 0.55).abs() < 1e-12);
        // a less extreme exponent reaches deep tails fine
        let m = model(DistributionSpec::heavy_tail(2, 1.1, 1.0));
        let x = m.quantile(0.999).unwrap();
        assert!((m.cdf(x).unwrap() - 0.999).abs() < 1e-12);
        let x = m.quantile(1e-30).unwrap();
        assert!(((m.cdf(x).unwrap() - 1e-30) / 1e-30).abs() < 1e-9);
    }

    #[test]
    fn heavy_tail_kernel_closed_form() {
        // d=2, beta=2 collapses to L(s) = 2 s (1-s): the marginal is
        // (1/2)(1+x^2)^{-3/2} with F(x) = (1 + x/sqrt(1+x^2))/2, so
        // 1 + h^2 = 1/(1-(2s-1)^2) and L = (1/2)(1+h^2)^{-1}.
        let m = model(DistributionSpec::heavy_tail(2, 2.0, 1.0));
        for s in [0.03, 0.2, 0.5, 0.77, 0.99] {
            assert_relative_eq!(m.kernel(s).unwrap(), 2.0 * s * (1.0 - s), max_relative = 1e-11);
            assert_relative_eq!(m.kernel_d1(s).unwrap(), 2.0 - 4.0 * s, epsilon = 1e-10);
            assert_relative_eq!(m.kernel_d2(s).unwrap(), -4.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn uniform_circle_kernel_is_constant() {
        // d=2: f_U ~ (1-x^2)^{-1/2} cancels against psi = sqrt(1-x^2)
        let m = model(DistributionSpec::sphere_uniform(2, 1.0));
        let c = 1.0 / std::f64::consts::PI;
        for s in [0.01, 0.3, 0.5, 0.9] {
            assert_relative_eq!(m.kernel(s).unwrap(), c, max_relative = 1e-12);
            assert_relative_eq!(m.kernel_d2(s).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn uniform_sphere_kernel_closed_form() {
        // d=3: F(x) = (1+x)/2, L(s) = sqrt(s(1-s))
        let m = model(DistributionSpec::sphere_uniform(3, 1.0));
        for s in [0.05, 0.25, 0.5, 0.8] {
            assert_relative_eq!(
                m.kernel(s).unwrap(),
                (s * (1.0 - s)).sqrt(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                m.kernel_d2(s).unwrap(),
                -0.25 / (s * (1.0 - s)).powf(1.5),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn gaussian_kernel_values() {
        let m = model(DistributionSpec::gaussian(2, 1.0));
        let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(m.kernel(0.5).unwrap(), phi0, max_relative = 1e-13);
        assert_relative_eq!(m.kernel_d2(0.5).unwrap(), -1.0 / phi0, max_relative = 1e-13);
    }

    #[test]
    fn kernel_symmetry_and_concavity() {
        let specs = [
            DistributionSpec::gaussian(2, 1.0),
            DistributionSpec::gaussian(3, 1.0),
            DistributionSpec::heavy_tail(2, 2.0, 1.0),
            DistributionSpec::heavy_tail(3, 3.0, 1.0),
            DistributionSpec::beta_ball(2, 0.0, 1.0),
            DistributionSpec::beta_ball(3, 1.0, 1.0),
            DistributionSpec::sphere_uniform(3, 1.0),
            DistributionSpec::sphere_uniform(4, 1.0),
        ];
        for spec in specs {
            let m = model(spec);
            let mut s = 0.01;
            while s < 0.5 {
                let l = m.kernel(s).unwrap();
                assert!(l > 0.0);
                assert_relative_eq!(l, m.kernel(1.0 - s).unwrap(), max_relative = 1e-10);
                assert!(m.kernel_d2(s).unwrap() < 0.0, "{:?} at {s}", m.spec());
                s += 0.037;
            }
        }
    }

    #[test]
    fn class_s_is_rejected() {
        let s = DistributionSpec::half_sphere(2, 0.0).unwrap();
        assert!(matches!(MarginalModel::new(&s), Err(Error::Precondition(_))));
    }
}
