//! Cross-validation of the two estimation routes and the concavity-gap
//! machinery on randomized inputs.

mod common;

use common::acceptance_grid;
use facetmono::estimators::{GapKernel, LinearRamp, QuadContext, WeightFn};
use facetmono::{
    expect_mc, expect_quad, concavity_gap, monotonicity_scan, DistributionSpec, MarginalModel,
    ScanMethod,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// First trusted Monte Carlo run for the heavy-tailed d=2, beta=2 model at
/// n = 6, frozen as a regression anchor. The exact expectation is
/// 30/7 = 4.2857...; the anchored run sits half a standard error below it.
const ANCHOR_TOTAL_FACETS: u64 = 4_285_341;
const ANCHOR_REPLICATES: u64 = 1_000_000;
const ANCHOR_SEED: u64 = 20_260_810;

#[test]
fn mc_regression_anchor_heavy_tail() {
    let spec = DistributionSpec::heavy_tail(2, 2.0, 1.0).unwrap();
    let est = expect_mc(&spec, 6, ANCHOR_REPLICATES, ANCHOR_SEED).unwrap();
    let anchored = ANCHOR_TOTAL_FACETS as f64 / ANCHOR_REPLICATES as f64;
    assert_eq!(est.value, anchored, "stream or hull behaviour changed");
    // and the anchor itself agrees with the quadrature route
    let quad = expect_quad(&spec, 6, 1e-9).unwrap();
    assert!((est.value - quad.value).abs() <= 4.0 * est.error);
    assert!((quad.value - 30.0 / 7.0).abs() <= 1e-9);
}

#[test]
fn cross_method_agreement_on_the_grid() {
    // lighter effort than the acceptance gate; the full 1e5-replicate run
    // lives in the acceptance suite
    for (i, spec) in acceptance_grid().into_iter().enumerate() {
        let n = 2 * spec.dim() + 6;
        let mc = expect_mc(&spec, n, 20_000, 7_000 + i as u64).unwrap();
        let quad = expect_quad(&spec, n, 1e-8).unwrap();
        assert!(
            (quad.value - mc.value).abs() <= 4.0 * mc.error + 1e-6,
            "{spec:?} n={n}: quad {} mc {} +- {}",
            quad.value,
            mc.value,
            mc.error
        );
    }
}

#[test]
fn calibration_constant_is_independent_of_n() {
    // c is fixed by P = 1 at n = d+1; re-deriving it from a Monte Carlo
    // anchor at n = d+2 must agree within Monte Carlo error
    let spec = DistributionSpec::beta_ball(2, 0.0, 1.0).unwrap();
    let d = spec.dim();
    let n = d + 2;
    let reps = 40_000u64;
    let mc = expect_mc(&spec, n, reps, 31).unwrap();
    let choose = facetmono::special::binomial(n as u64, d as u64);
    let p_mc = mc.value / choose;
    let p_quad = facetmono::facet_probability_quad(&spec, n, 1e-10).unwrap();
    // c_mc / c_quad = p_mc / p_quad
    let rel_err = 4.0 * (mc.error / choose) / p_quad.value;
    assert!(
        ((p_mc / p_quad.value) - 1.0).abs() <= rel_err,
        "p_mc {p_mc} vs p_quad {}",
        p_quad.value
    );
}

#[test]
fn quad_scan_on_the_ball_is_monotone_with_positive_gaps() {
    let spec = DistributionSpec::beta_ball(3, 1.0, 1.0).unwrap();
    let report = monotonicity_scan(&spec, 4, 40, ScanMethod::Quad { abs_tol: 1e-9 }, 0).unwrap();
    assert!(report.monotone);
    assert!(report.gaps.iter().all(|&g| g > 0.0));
    // values start at the simplex count
    assert_eq!(report.estimates[0].value, 4.0);
}

#[test]
fn concavity_gap_positive_on_randomized_family() {
    // 100 random (h, g, s*) draws per kernel
    let kernels = [
        DistributionSpec::gaussian(2, 1.0).unwrap(),
        DistributionSpec::heavy_tail(2, 2.0, 1.0).unwrap(),
        DistributionSpec::beta_ball(2, 0.0, 1.0).unwrap(),
        DistributionSpec::sphere_uniform(3, 1.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(271_828);
    for spec in &kernels {
        let model = MarginalModel::new(spec).unwrap();
        for trial in 0..100 {
            let h = match trial % 3 {
                0 => WeightFn::Constant(rng.random_range(0.1..5.0)),
                1 => WeightFn::OneMinusPow(rng.random_range(0..12u32)),
                _ => WeightFn::BetaShape {
                    a: rng.random_range(-0.5..3.0),
                    b: rng.random_range(-0.5..3.0),
                },
            };
            let g = LinearRamp::new(
                -rng.random_range(0.1..10.0f64),
                rng.random_range(0.05..1.0f64),
            )
            .unwrap();
            let d = rng.random_range(2..5usize);
            let gap = concavity_gap(&h, &g, GapKernel::Concave(&model), d).unwrap();
            assert!(gap > 0.0, "{spec:?} {h:?} {g:?} d={d}: gap {gap}");
        }
    }
}

#[test]
fn estimates_respect_the_simplex_floor() {
    // a nondegenerate hull has at least d+1 facets, so value >= d+1 - error
    for spec in acceptance_grid() {
        let d = spec.dim() as f64;
        let mc = expect_mc(&spec, spec.dim() + 3, 2_000, 17).unwrap();
        assert!(mc.value >= d + 1.0 - mc.error);
        let quad = expect_quad(&spec, spec.dim() + 3, 1e-8).unwrap();
        assert!(quad.value >= d + 1.0 - quad.error);
    }
}

#[test]
fn probability_context_reuses_calibration_consistently() {
    let spec = DistributionSpec::heavy_tail(2, 2.0, 1.0).unwrap();
    let ctx = QuadContext::new(&spec).unwrap();
    // closed form: P(n) = 12/(n(n+1))
    for n in [3usize, 5, 9, 20] {
        let p = ctx.probability(n, 1e-11).unwrap();
        let exact = 12.0 / (n as f64 * (n as f64 + 1.0));
        assert!((p.value - exact).abs() <= 1e-10, "n={n}: {} vs {exact}", p.value);
    }
}

#[test]
fn circle_scan_gaps_are_exactly_one() {
    // U d=2: E f = n, so every gap is 1
    let spec = DistributionSpec::sphere_uniform(2, 1.0).unwrap();
    let report = monotonicity_scan(&spec, 3, 50, ScanMethod::Quad { abs_tol: 1e-9 }, 0).unwrap();
    assert!(report.monotone);
    for gap in &report.gaps {
        assert!((gap - 1.0).abs() <= 1e-8, "gap {gap}");
    }
}

#[test]
fn classical_constants_from_the_quadrature_route() {
    // Sylvester's four-point constant: for four uniform points in a disk the
    // probability that one lands inside the others' triangle is 35/(12 pi^2),
    // hence E f(P_4) = 4 - 35/(12 pi^2)
    let disk = DistributionSpec::beta_ball(2, 0.0, 1.0).unwrap();
    let got = expect_quad(&disk, 4, 1e-10).unwrap();
    let exact = 4.0 - 35.0 / (12.0 * std::f64::consts::PI.powi(2));
    assert!((got.value - exact).abs() <= 1e-9, "disk: {} vs {exact}", got.value);

    // Kingman's mean tetrahedron volume in the unit 3-ball is 9/715 of the
    // ball volume, so with five uniform points E f(P_5) = 6 - 10*(9/715)
    // = 840/143 (facets of a simplicial 3-polytope: f = 2V - 4)
    let ball = DistributionSpec::beta_ball(3, 0.0, 1.0).unwrap();
    let got = expect_quad(&ball, 5, 1e-10).unwrap();
    let exact = 840.0 / 143.0;
    assert!((got.value - exact).abs() <= 1e-9, "ball: {} vs {exact}", got.value);
}

#[test]
#[ignore = "full-effort run (~2 min); invoke with cargo test -- --ignored"]
fn scan_mc_gaussian_full_range() {
    // every gap that resolves above 4 combined standard errors at 1e5
    // replicates must be positive across n in [3, 60]
    let spec = DistributionSpec::gaussian(2, 1.0).unwrap();
    let report =
        monotonicity_scan(&spec, 3, 60, ScanMethod::Mc { replicates: 100_000 }, 77).unwrap();
    for pair in report.estimates.windows(2) {
        let gap = pair[1].value - pair[0].value;
        let combined = 4.0 * (pair[0].error.powi(2) + pair[1].error.powi(2)).sqrt();
        if gap.abs() > combined {
            assert!(gap > 0.0, "resolved negative gap at n={}", pair[1].n);
        }
    }
}

#[test]
fn facet_probability_decreases_in_n() {
    // the damping factor (1-s)^{n-d} shrinks pointwise in n, so P must too
    for spec in acceptance_grid() {
        let d = spec.dim();
        let mut prev = f64::INFINITY;
        for n in [d + 1, d + 2, d + 4, d + 9, d + 30] {
            let p = facetmono::facet_probability_quad(&spec, n, 1e-10).unwrap();
            assert!(p.value < prev, "{spec:?}: P({n}) = {} not below {prev}", p.value);
            assert!(p.value > 0.0);
            prev = p.value;
        }
    }
}
