//! Named check suites shared by the `verify` command and the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::brute_inner;
use super::projection::{projection_check, TestFn};
use super::sampling::{sample_factors, WickProgram};
use crate::chaos::{wick_inner, WickMonomial};
use crate::engine::hypergeom_inner;
use crate::error::Result;
use crate::gauss_kernel::{Factor, FactorKind, NodeSet, TimePoint};
use crate::skorohod::{CoeffFn, IntegrandSpec, IntegrandTerm};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    /// Largest relative error, or largest |z| for statistical suites.
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    fn new(name: &str, checks: usize, worst: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: worst <= tolerance, checks, worst, tolerance }
    }
}

fn relative(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// A monomial of the given degree with at most `max_factors` distinct
/// factors of random kind, drawn from a fixed pool of times.
pub fn random_monomial(rng: &mut ChaCha8Rng, grid: &NodeSet, degree: u32, max_factors: usize) -> Result<WickMonomial> {
    let times =
        [TimePoint::rational(1, 5)?, TimePoint::rational(3, 10)?, TimePoint::inv_pi(), TimePoint::rational(1, 2)?, TimePoint::inv_sqrt2(), TimePoint::ONE];
    let kinds = [FactorKind::Path, FactorKind::Interp, FactorKind::Bridge];
    let mut factors: Vec<(Factor, u32)> = Vec::new();
    let mut left = degree;
    while left > 0 {
        let p = if factors.len() + 1 >= max_factors { left } else { rng.gen_range(1..=left) };
        let f = loop {
            let f = Factor::of_kind(kinds[rng.gen_range(0..3)], times[rng.gen_range(0..times.len())], Some(grid))?;
            if !f.is_null() {
                break f;
            }
        };
        factors.push((f, p));
        left -= p;
    }
    Ok(WickMonomial::new(rng.gen_range(-2.0..2.0), factors))
}

/// wick_inner against the permutation sum on random pairs of equal degree.
pub fn oracle_suite(pairs: usize, max_degree: u32, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = NodeSet::equidistant(3)?;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let d = rng.gen_range(0..=max_degree);
        let a = random_monomial(&mut rng, &grid, d, 4)?;
        let b = random_monomial(&mut rng, &grid, d, 4)?;
        worst = worst.max(relative(wick_inner(&a, &b)?, brute_inner(&a, &b)?));
    }
    Ok(SuiteResult::new("oracle", pairs, worst, 1e-10))
}

/// (t, z) points for [`hypergeom_suite`].
pub const HYPERGEOM_POINTS: [(f64, f64); 5] = [(0.1, 0.5), (0.25, 0.4), (0.3, 0.9), (0.5, 0.75), (0.7, 0.95)];

/// Closed form against wick_inner for every k <= k_max and 0 <= i, j <= k.
/// The interpolant sits on the grid {t/z, 1}, which makes var(B_t) = t(1 - z).
pub fn hypergeom_suite(k_max: u32) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (t, z) in HYPERGEOM_POINTS {
        let grid = NodeSet::general([TimePoint::from_f64(t / z)?])?;
        let tp = TimePoint::from_f64(t)?;
        let (w, l) = (Factor::path(tp), Factor::interp(tp, &grid)?);
        for k in 0..=k_max {
            let mono = |i: u32| WickMonomial::new(1.0, [(w.clone(), k - i), (l.clone(), i)]);
            for i in 0..=k {
                for j in 0..=k {
                    worst = worst.max(relative(hypergeom_inner(k, i, j, t, z), wick_inner(&mono(i), &mono(j))?));
                    checks += 1;
                }
            }
        }
    }
    Ok(SuiteResult::new("hypergeometric", checks, worst, 1e-11))
}

/// Sampled first and second moments of random monomials against the exact
/// values, in standard errors.
pub fn moment_suite(monomials: usize, samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = NodeSet::equidistant(3)?;
    let mut worst: f64 = 0.0;
    for i in 0..monomials {
        let degree = rng.gen_range(1..=4);
        let m = random_monomial(&mut rng, &grid, degree, 3)?;
        let factors: Vec<Factor> = m.factors().iter().map(|(f, _)| f.clone()).collect();
        let batch = sample_factors(&factors, samples, seed.wrapping_add(i as u64 + 1))?;
        let prog = WickProgram::compile(&m, &batch.factors, &batch.gram)?;
        let k = factors.len();
        let mut scratch = Vec::new();
        let v: Vec<f64> = (0..samples).map(|r| prog.eval(&batch.values[r * k..(r + 1) * k], &mut scratch)).collect();
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        let (m1, se1) = mean_se(&v);
        let (m2, se2) = mean_se(&sq);
        worst = worst.max((m1 / se1).abs()).max(((m2 - wick_inner(&m, &m)?) / se2).abs());
    }
    Ok(SuiteResult::new("moments", 2 * monomials, worst, 4.0))
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// The three integrands of the projection suite with their grids and test
/// functions.
pub fn projection_cases() -> Result<Vec<(IntegrandSpec, NodeSet, Vec<TestFn>)>> {
    let term = |coeff, l1, l| IntegrandTerm { coeff, l1, l };
    Ok(vec![
        (
            IntegrandSpec::new(vec![TimePoint::inv_pi()], vec![term(CoeffFn::constant(1.0), 0, vec![2])])?,
            NodeSet::equidistant(2)?,
            vec![TestFn::constant(), TestFn::node(2, 1), TestFn::new(vec![(1, 1), (2, 1)])],
        ),
        (
            IntegrandSpec::new(vec![], vec![term(CoeffFn::monomial(1.0, 1), 1, vec![])])?,
            NodeSet::equidistant(3)?,
            vec![TestFn::constant(), TestFn::node(3, 1), TestFn::new(vec![(1, 1), (2, 1)]), TestFn::node(3, 2)],
        ),
        (
            IntegrandSpec::new(vec![TimePoint::inv_sqrt2()], vec![term(CoeffFn::exp(1.0, 1.0), 1, vec![1]), term(CoeffFn::constant(1.0), 0, vec![0])])?,
            NodeSet::equidistant(3)?,
            vec![TestFn::constant(), TestFn::node(2, 1), TestFn::new(vec![(2, 1), (3, 1)]), TestFn::node(3, 2)],
        ),
    ])
}

/// Orthogonality of the residual to node-value polynomials.
pub fn projection_suite(samples: usize, seed: u64) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (i, (u, g, tests)) in projection_cases()?.iter().enumerate() {
        let r = projection_check(u, g, tests, samples, seed.wrapping_add(i as u64))?;
        checks += r.checks.len();
        worst = r.checks.iter().fold(worst, |w, c| w.max(c.z.abs()));
    }
    Ok(SuiteResult::new("projection", checks, worst, 4.0))
}

/// Two runs with the same seed give bit-identical output.
pub fn determinism_suite(samples: usize, seed: u64) -> Result<SuiteResult> {
    let (u, g, tests) = projection_cases()?.swap_remove(2);
    let a = serde_json::to_string(&projection_check(&u, &g, &tests, samples, seed)?)?;
    let b = serde_json::to_string(&projection_check(&u, &g, &tests, samples, seed)?)?;
    let fs = [Factor::path(TimePoint::inv_pi()), Factor::bridge(TimePoint::inv_pi(), &g)?];
    let x = sample_factors(&fs, samples, seed)?;
    let y = sample_factors(&fs, samples, seed)?;
    let same = a == b && x.values.iter().zip(&y.values).all(|(p, q)| p.to_bits() == q.to_bits());
    Ok(SuiteResult::new("determinism", 2, if same { 0.0 } else { 1.0 }, 0.0))
}
