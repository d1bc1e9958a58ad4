//! Integrands built from infinitely many fixed times, truncated: X_T with
//! times {kT}, and the family X_q whose smoothness is tuned by q.

use wicklab::engine::{mse, xq_moment_bound, xq_mse, xt_integrability_index, xt_process};
use wicklab::gauss_kernel::{NodeSet, TimePoint};
use wicklab::skorohod::QuadratureConfig;
use wicklab::weyl::fit_rate;

fn main() -> wicklab::Result<()> {
    let quad = QuadratureConfig::default();
    let t = TimePoint::inv_pi();

    let x = xt_process(t, 4)?;
    println!("X_T with K = 4: integrability index {:.6}, tail bound {:.3e}", xt_integrability_index(t, 4)?, x.tail_bound);
    for n in [10u64, 40, 160, 640] {
        let r = mse(&x, &NodeSet::equidistant(n)?, &quad)?;
        println!("  n = {n:>4}: e2 = {:.6e}, pre-asymptotic: {}", r.e2, r.pre_asymptotic);
    }

    // the closed form makes deep truncations cheap
    let ns: Vec<u64> = (4..=16).map(|k| 1u64 << k).collect();
    println!("{:>6} {:>12} {:>12} {:>12}", "q", "M", "alpha", "tail");
    for q in [-0.2, 0.0, 0.2, 0.4] {
        for m in [1_000u32, 100_000] {
            let points: Vec<(u64, f64)> = ns.iter().map(|&n| Ok((n, xq_mse(t, q, &NodeSet::equidistant(n)?, m)?.e))).collect::<wicklab::Result<_>>()?;
            let fit = fit_rate(&points)?;
            println!("{q:>6.2} {m:>12} {:>12.4} {:>12.3e}", fit.alpha, xq_mse(t, q, &NodeSet::equidistant(1)?, m)?.truncation_bound);
        }
        println!("{q:>6.2} moment bound at M = 1000: {:.4e}", xq_moment_bound(t, q, 1_000)?);
    }
    Ok(())
}
