//! |W_t| ⋄ W_1: exact errors from the chaos-by-chaos closed form, the lower
//! bound along well-placed grids, and an empirical rate.

use wicklab::engine::{abs_lower_bound, abs_mse};
use wicklab::gauss_kernel::{NodeSet, TimePoint};
use wicklab::weyl::{fit_rate, weyl_records};

fn main() -> wicklab::Result<()> {
    let t = TimePoint::inv_pi();
    let records = weyl_records(t, 100_000)?;
    let mut points = Vec::new();
    println!("{:>7} {:>12} {:>12} {:>12}", "n", "e", "lower", "n^(1/4) e");
    for (i, &n) in records.indices.iter().enumerate() {
        // the tail of |W_t| decays slowly, so keep many chaoses
        let r = abs_mse(t, &NodeSet::equidistant(n)?, (100 * n) as u32)?;
        if i % 10 == 0 || i + 1 == records.len() {
            println!("{n:>7} {:>12.6e} {:>12.6e} {:>12.6}", r.e, abs_lower_bound(t.value(), n), (n as f64).powf(0.25) * r.e);
        }
        if n >= 10_000 {
            points.push((n, r.e));
        }
    }
    let fit = fit_rate(&points)?;
    println!("fit over {:?}: e ~ {:.4} n^{:.4} (r2 {:.4})", fit.window, fit.c, fit.alpha, fit.r2);

    // rational t: grids containing t reproduce the integral exactly
    let third = TimePoint::rational(1, 3)?;
    for n in [3u64, 4, 6, 7, 9] {
        println!("t = 1/3, n = {n}: e = {:.3e}", abs_mse(third, &NodeSet::equidistant(n)?, 200)?.e);
    }
    Ok(())
}
