//! Wick monomials, exact inner products and conditioning on a grid.

use wicklab::chaos::{wick_inner, ChaosExpansion, WickMonomial};
use wicklab::gauss_kernel::{hermite, Factor, NodeSet, TimePoint};
use wicklab::verification::brute_inner;

fn main() -> wicklab::Result<()> {
    let tau = TimePoint::inv_pi();
    let grid = NodeSet::equidistant(3)?;
    let w = Factor::path(tau);
    let w1 = Factor::path(TimePoint::ONE);

    // W_tau^{⋄3} has norm 3! tau^3 and is the Hermite polynomial h_3 in W_tau
    let cube = WickMonomial::single(w.clone(), 3);
    println!("E[(W^⋄3)^2] = {:.12}, 6 tau^3 = {:.12}", wick_inner(&cube, &cube)?, 6.0 * tau.value().powi(3));
    println!("h_3(var = tau, x = 0.7) = {:.6}", hermite(3, tau.value(), 0.7));

    // mixed factors, checked against the permutation sum
    let a = WickMonomial::new(1.5, [(w.clone(), 2), (w1.clone(), 1)]);
    let b = WickMonomial::new(-0.5, [(Factor::bridge(tau, &grid)?, 1), (Factor::interp(tau, &grid)?, 1), (w1.clone(), 1)]);
    println!("<a, b> = {:.12} (permutation sum {:.12})", wick_inner(&a, &b)?, brute_inner(&a, &b)?);

    // Parseval over chaos levels
    let x = ChaosExpansion::new([a.clone(), b.clone(), WickMonomial::constant(2.0), WickMonomial::single(w.clone(), 1)]);
    let levels: Vec<f64> = (0..=x.max_degree()).map(|k| x.project(k).norm_sq()).collect::<wicklab::Result<_>>()?;
    println!("|x|^2 = {:.12}, by chaos {levels:.6?}, sum {:.12}", x.norm_sq()?, levels.iter().sum::<f64>());

    // conditioning on the grid: W -> L, B -> 0
    let cx = x.condition(&grid)?;
    let r = x.condition_residual(&grid)?;
    println!("|E[x|grid]|^2 = {:.12}, |x - E[x|grid]|^2 = {:.12}", cx.norm_sq()?, r.norm_sq()?);
    println!("residual orthogonal to projection: <r, E[x|grid]> = {:.2e}", r.inner(&cx)?);
    // only Path factors can be conditioned on a different grid
    let path_only = ChaosExpansion::new([a]);
    for n in [1u64, 2, 4, 8, 16] {
        println!("  n = {n:>2}: |a - E[a|P_n]|^2 = {:.10}", path_only.condition_residual(&NodeSet::equidistant(n)?)?.norm_sq()?);
    }
    Ok(())
}
