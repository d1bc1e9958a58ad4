//! e_n^2 = E[(Y - E[Y | W_{1/n}, ..., W_1])^2] for a few integrands.

use wicklab::engine::mse;
use wicklab::gauss_kernel::{NodeSet, TimePoint};
use wicklab::skorohod::{CoeffFn, IntegrandSpec, IntegrandTerm, QuadratureConfig};

fn table(name: &str, u: &IntegrandSpec, ns: &[u64]) -> wicklab::Result<()> {
    let quad = QuadratureConfig::default();
    println!("{name}");
    println!("{:>6} {:>14} {:>12} {:>12} {:>10}", "n", "e2", "n e2", "n^2 e2", "gap");
    for &n in ns {
        let r = mse(u, &NodeSet::equidistant(n)?, &quad)?;
        let nf = n as f64;
        println!("{n:>6} {:>14.6e} {:>12.6} {:>12.6} {:>10.1e}", r.e2, nf * r.e2, nf * nf * r.e2, r.components.projection_gap);
    }
    println!();
    Ok(())
}

fn main() -> wicklab::Result<()> {
    let ns = [3, 7, 12, 30, 60, 120, 300];
    let term = |coeff, l1, l| IntegrandTerm { coeff, l1, l };

    // irrational fixed time: n e^2 keeps oscillating with {n tau}
    let irr = IntegrandSpec::new(vec![TimePoint::inv_sqrt2()], vec![term(CoeffFn::constant(1.0), 0, vec![2])])?;
    table("u = W_{1/√2}^⋄2", &irr, &ns)?;

    // rational fixed time observed at multiples of 3: only the n^-2 part is left
    let rat = IntegrandSpec::new(vec![TimePoint::rational(1, 3)?], vec![term(CoeffFn::monomial(1.0, 1), 0, vec![2])])?;
    table("u = s W_{1/3}^⋄2", &rat, &ns)?;

    // adapted and time dependent
    let ito = IntegrandSpec::new(vec![], vec![term(CoeffFn::exp(1.0, 1.0), 1, vec![])])?;
    table("u = e^s W_s", &ito, &ns)?;
    Ok(())
}
