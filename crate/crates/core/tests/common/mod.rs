//! Randomized invariant checks shared by the invariant tests and the
//! acceptance run. Every check runs a proptest runner with a fixed seed.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wicklab::chaos::{ChaosExpansion, WickMonomial};
use wicklab::engine::mse;
use wicklab::gauss_kernel::{Factor, NodeSet, TimePoint};
use wicklab::skorohod::{
    boundary_increment, second_moment, skorohod_integral, time_integral, CoeffFn, CoeffTerm, Coordinate, IntegrandSpec, IntegrandTerm, QuadratureConfig,
};
use wicklab::verification::random_monomial;

pub fn runner(cases: u32, seed: u64) -> TestRunner {
    TestRunner::new(Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() })
}

fn run<S: Strategy>(cases: u32, seed: u64, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases, seed).run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(e: wicklab::Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub fn rat(p: u64, q: u64) -> TimePoint {
    TimePoint::rational(p, q).unwrap()
}

fn time_pool() -> Vec<TimePoint> {
    vec![rat(1, 7), rat(1, 3), TimePoint::inv_pi(), rat(1, 2), TimePoint::inv_sqrt2(), rat(9, 10)]
}

pub fn coeff_strategy() -> impl Strategy<Value = CoeffFn> {
    prop::collection::vec((-1.0f64..1.0, 0u32..3, prop_oneof![Just(0.0), -1.0f64..1.0]), 1..3)
        .prop_map(|ts| CoeffFn::new(ts.into_iter().map(|(c, p, r)| CoeffTerm { c, p, r })))
}

/// Integrands with one or two fixed times and total Wick degree at most
/// `max_degree` per term.
pub fn spec_strategy(max_degree: u32) -> impl Strategy<Value = IntegrandSpec> {
    let taus = prop::sample::subsequence(time_pool(), 1..3);
    taus.prop_flat_map(move |taus| {
        let k = taus.len();
        let terms = prop::collection::vec((coeff_strategy(), 0u32..3, prop::collection::vec(0u32..3, k)), 1..3);
        (Just(taus), terms)
    })
    .prop_filter_map("bounded degree", move |(taus, terms)| {
        let terms: Vec<IntegrandTerm> =
            terms.into_iter().filter(|(_, l1, l)| l1 + l.iter().sum::<u32>() <= max_degree).map(|(coeff, l1, l)| IntegrandTerm { coeff, l1, l }).collect();
        IntegrandSpec::new(taus, terms).ok().filter(|u| !u.terms.is_empty())
    })
}

/// Up to five random monomials with mixed factor kinds on `grid`.
pub fn random_expansion(seed: u64, grid: &NodeSet) -> ChaosExpansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=5);
    let terms: Vec<WickMonomial> = (0..count)
        .map(|_| {
            let degree = rng.gen_range(0..=4);
            random_monomial(&mut rng, grid, degree, 3).unwrap()
        })
        .collect();
    ChaosExpansion::new(terms)
}

/// Random monomials in Path factors only.
pub fn random_path_expansion(seed: u64) -> ChaosExpansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = time_pool();
    let count = rng.gen_range(1..=5);
    ChaosExpansion::new((0..count).map(|_| {
        let factors: Vec<(Factor, u32)> = (0..rng.gen_range(0..=3)).map(|_| (Factor::path(pool[rng.gen_range(0..pool.len())]), rng.gen_range(1..=2))).collect();
        WickMonomial::new(rng.gen_range(-2.0..2.0), factors)
    }))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// ‖x‖^2 = Σ_k ‖π_k x‖^2.
pub fn parseval(cases: u32, seed: u64) -> Result<(), String> {
    run(cases, seed, (any::<u64>(), 1u64..8), |(s, n)| {
        let grid = NodeSet::equidistant(n).unwrap();
        let x = random_expansion(s, &grid);
        let total = x.norm_sq().map_err(fail)?;
        let mut parts = 0.0;
        for k in 0..=x.max_degree() {
            parts += x.project(k).norm_sq().map_err(fail)?;
        }
        prop_assert!(rel_close(total, parts, 1e-10), "{} vs {}", total, parts);
        Ok(())
    })
}

/// The three-part error agrees with E[Y^2] - E[Ŷ^2].
pub fn projection_identity(cases: u32, seed: u64) -> Result<(), String> {
    let quad = QuadratureConfig::default();
    run(cases, seed, (spec_strategy(3), 1u64..8), move |(u, n)| {
        let r = mse(&u, &NodeSet::equidistant(n).unwrap(), &quad).map_err(fail)?;
        prop_assert!(r.components.projection_gap <= 1e-9 * r.components.moment, "{:?}", r.components);
        prop_assert!(r.e2 >= -1e-12);
        Ok(())
    })
}

/// e^2 on P_{kn} never exceeds e^2 on P_n.
pub fn nested_monotonicity(cases: u32, seed: u64) -> Result<(), String> {
    let quad = QuadratureConfig::default();
    run(cases, seed, (spec_strategy(3), 1u64..5, 2u64..4), move |(u, n, k)| {
        let coarse = mse(&u, &NodeSet::equidistant(n).unwrap(), &quad).map_err(fail)?.e2;
        let fine = mse(&u, &NodeSet::equidistant(k * n).unwrap(), &quad).map_err(fail)?.e2;
        prop_assert!(fine <= coarse + 1e-12, "{} > {}", fine, coarse);
        Ok(())
    })
}

/// Conditioning is idempotent, contracts the norm, leaves an orthogonal
/// residual, and is monotone under refinement.
pub fn conditioning(cases: u32, seed: u64) -> Result<(), String> {
    run(cases, seed, (any::<u64>(), 1u64..6, 2u64..4), |(s, n, k)| {
        let grid = NodeSet::equidistant(n).unwrap();
        let x = random_expansion(s, &grid);
        let cx = x.condition(&grid).map_err(fail)?;
        let again = cx.condition(&grid).map_err(fail)?;
        let drift = again.sub(&cx).norm_sq().map_err(fail)?;
        prop_assert!(drift <= 1e-14 * cx.norm_sq().map_err(fail)?.max(1e-300), "idempotence {}", drift);
        let (nx, ncx) = (x.norm_sq().map_err(fail)?, cx.norm_sq().map_err(fail)?);
        prop_assert!(ncx <= nx * (1.0 + 1e-12) + 1e-14, "contraction {} > {}", ncx, nx);
        let resid = x.condition_residual(&grid).map_err(fail)?;
        prop_assert!(resid.inner(&cx).map_err(fail)?.abs() <= 1e-10 * nx.max(1.0));
        prop_assert!(resid.sub(&x.sub(&cx)).norm_sq().map_err(fail)? <= 1e-14 * nx.max(1e-300));

        let y = random_path_expansion(s);
        let fine = NodeSet::equidistant(k * n).unwrap();
        let coarse_err = y.condition_residual(&grid).map_err(fail)?.norm().map_err(fail)?;
        let fine_err = y.condition_residual(&fine).map_err(fail)?.norm().map_err(fail)?;
        prop_assert!(fine_err <= coarse_err + 1e-12, "{} > {}", fine_err, coarse_err);
        Ok(())
    })
}

/// f(H) - f(0) - δ(∂_x f) - ∫ L f ds has zero second moment.
pub fn ibp_residual(cases: u32, seed: u64) -> Result<(), String> {
    let quad = QuadratureConfig::default();
    run(cases, seed, spec_strategy(3), move |f| {
        let lhs = boundary_increment(&f).map_err(fail)?;
        let dx = skorohod_integral(&f.partial_x(Coordinate::Running).map_err(fail)?).map_err(fail)?;
        let dt = time_integral(&f.wick_l());
        let residual = lhs.sub(&dx).map_err(fail)?.sub(&dt).map_err(fail)?;
        let r = second_moment(&residual, &quad).map_err(fail)?;
        prop_assert!(r.abs() <= 1e-10, "residual {}", r);
        Ok(())
    })
}
