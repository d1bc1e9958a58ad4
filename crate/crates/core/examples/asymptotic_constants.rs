//! The limiting constants against finite-n errors.

use std::f64::consts::PI;

use wicklab::engine::{c2, ito_c2, mse, sko_exp};
use wicklab::gauss_kernel::{NodeSet, TimePoint};
use wicklab::skorohod::{CoeffFn, IntegrandSpec, IntegrandTerm, QuadratureConfig};
use wicklab::weyl::weyl_sequence;

fn main() -> wicklab::Result<()> {
    let quad = QuadratureConfig::default();
    let tau = TimePoint::inv_pi();

    // e^{W_tau}: n e^2 along grids with {n tau} -> 1/2 approaches c2^2
    let u = sko_exp(tau, 18)?;
    let k = c2(&u, &quad)?;
    println!("e^(W_1/π): c1 = {:.3e}, c2^2 = {:.10}, (1 + π^-2) e^(2/π) / 4 = {:.10}", k.c1, k.c2 * k.c2, (1.0 + PI.powi(-2)) * (2.0 / PI).exp() / 4.0);
    for n in weyl_sequence(tau, 5, 20_000)?.indices {
        let r = mse(&u, &NodeSet::equidistant(n)?, &quad)?;
        println!("  n = {n:>6}: n e^2 = {:.10}", n as f64 * r.e2);
    }

    // a linear coefficient with a rational time: n^2 e^2 approaches c1^2
    let lin = IntegrandSpec::new(vec![TimePoint::rational(1, 2)?], vec![IntegrandTerm { coeff: CoeffFn::monomial(1.0, 1), l1: 0, l: vec![1] }])?;
    let c1 = c2(&lin, &quad)?.c1;
    println!("s W_1/2: c1^2 = {:.10}", c1 * c1);
    for n in [2u64, 8, 32, 128] {
        let r = mse(&lin, &NodeSet::equidistant(n)?, &quad)?;
        println!("  n = {n:>4}: n^2 e^2 = {:.10}", (n * n) as f64 * r.e2);
    }

    // adapted integrand stopped off the grid
    let f = IntegrandSpec::new(vec![], vec![IntegrandTerm { coeff: CoeffFn::constant(1.0), l1: 2, l: vec![] }])?.with_horizon(tau)?;
    let c = ito_c2(&f, &quad)?;
    println!("W_s^⋄2 on [0, 1/π]: adapted constant squared = {:.10}", c * c);
    for n in weyl_sequence(tau, 3, 5_000)?.indices {
        let r = mse(&f, &NodeSet::equidistant(n)?, &quad)?;
        println!("  n = {n:>6}: n e^2 = {:.10}", n as f64 * r.e2);
    }
    Ok(())
}
