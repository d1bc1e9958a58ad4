//! Pathwise sampling of Wick monomials and a statistical check that the
//! residual Y - Ŷ is orthogonal to functions of the observed values.

use wicklab::chaos::{wick_inner, WickMonomial};
use wicklab::gauss_kernel::{Factor, NodeSet, TimePoint};
use wicklab::skorohod::{CoeffFn, IntegrandSpec, IntegrandTerm};
use wicklab::verification::{evaluate_monomial, projection_check, sample_factors, TestFn};

fn main() -> wicklab::Result<()> {
    let grid = NodeSet::equidistant(3)?;
    let tau = TimePoint::inv_pi();
    let m = WickMonomial::new(1.0, [(Factor::path(tau), 2), (Factor::bridge(TimePoint::inv_sqrt2(), &grid)?, 1), (Factor::path(TimePoint::ONE), 1)]);
    let factors: Vec<Factor> = m.factors().iter().map(|(f, _)| f.clone()).collect();

    let count = 400_000;
    let batch = sample_factors(&factors, count, 42)?;
    let v = evaluate_monomial(&m, &batch)?;
    let nf = count as f64;
    let mean = v.iter().sum::<f64>() / nf;
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let second = sq.iter().sum::<f64>() / nf;
    let se = (sq.iter().map(|y| (y - second).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
    println!("sampled E[X] = {mean:.5} (exact 0), E[X^2] = {second:.5} ± {se:.5} (exact {:.5})", wick_inner(&m, &m)?);

    let u = IntegrandSpec::new(vec![tau], vec![IntegrandTerm { coeff: CoeffFn::exp(1.0, 1.0), l1: 1, l: vec![1] }])?;
    let tests = [TestFn::constant(), TestFn::node(1, 1), TestFn::node(3, 2), TestFn::new(vec![(1, 1), (2, 1)])];
    let report = projection_check(&u, &grid, &tests, count, 7)?;
    for c in &report.checks {
        println!("E[(Y - Ŷ) {}] = {:+.5} ± {:.5} (z = {:+.2})", c.test_fn, c.mean, c.std_err, c.z);
    }
    println!("all within 4 standard errors: {}", report.passed);
    Ok(())
}
