//! Independent checks of the exact engine: a literal permutation sum for
//! Wick inner products, pathwise Monte Carlo evaluation of Wick monomials,
//! and a statistical test that the approximation residual is orthogonal to
//! functions of the observed node values.

mod projection;
mod sampling;
mod suites;

pub use projection::{projection_check, residual_expansion, ProjectionCheck, ProjectionReport, TestFn};
pub use sampling::{evaluate_monomial, sample_factors, standard_normal, SampleBatch, Sampler, WickProgram};
pub use suites::{determinism_suite, hypergeom_suite, moment_suite, oracle_suite, projection_cases, projection_suite, random_monomial, SuiteResult};

use crate::chaos::WickMonomial;
use crate::error::{Error, Result};
use crate::gauss_kernel::{cov, Factor};

/// Degree limit of [`brute_inner`]; 8! permutations per call.
pub const BRUTE_MAX_DEGREE: u32 = 8;

/// E[a b] as the sum over all bijections between the factor copies of `a`
/// and of `b` of the product of covariances.
pub fn brute_inner(a: &WickMonomial, b: &WickMonomial) -> Result<f64> {
    if a.degree() != b.degree() {
        return Ok(0.0);
    }
    if a.degree() > BRUTE_MAX_DEGREE {
        return Err(Error::DegreeTooLarge(a.degree()));
    }
    let expand = |m: &WickMonomial| -> Vec<Factor> { m.factors().iter().flat_map(|(f, l)| std::iter::repeat_n(f.clone(), *l as usize)).collect() };
    let (xs, ys) = (expand(a), expand(b));
    let k = xs.len();
    let mut c = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            c[i * k + j] = cov(&xs[i], &ys[j])?;
        }
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, &mut |p| {
        total += p.iter().enumerate().map(|(i, &j)| c[i * k + j]).product::<f64>();
    });
    Ok(a.coeff() * b.coeff() * total)
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}
