//! Joint covariance of W_t, its grid interpolation L_t and the bridge B_t.

use wicklab::gauss_kernel::{cov, Factor, NodeSet, TimePoint};

fn main() -> wicklab::Result<()> {
    let grid = NodeSet::equidistant(4)?;
    let times = [TimePoint::rational(3, 10)?, TimePoint::inv_pi(), TimePoint::rational(1, 2)?];

    let mut factors = Vec::new();
    for t in times {
        factors.push(Factor::path(t));
        factors.push(Factor::interp(t, &grid)?);
        factors.push(Factor::bridge(t, &grid)?);
    }
    let labels: Vec<String> = factors.iter().map(|f| format!("{:?}({:.4})", f.kind(), f.time().value())).collect();

    println!("covariance on the 4-cell grid");
    print!("{:>18}", "");
    for l in &labels {
        print!("{l:>18}");
    }
    println!();
    for (a, la) in factors.iter().zip(&labels) {
        print!("{la:>18}");
        for b in &factors {
            print!("{:>18.6}", cov(a, b)?);
        }
        println!();
    }

    // the bridge never exceeds a quarter of its cell and vanishes on nodes
    for t in times {
        let b = Factor::bridge(t, &grid)?;
        println!("var B_{:.4} = {:.6} (cell bound {:.6}, null: {})", t.value(), b.variance(), 0.25 / 4.0, b.is_null());
    }

    // an untagged time too close to a node cannot be placed in a cell
    let near = TimePoint::from_f64(0.25 + 1e-12)?;
    match Factor::bridge(near, &grid) {
        Err(e) => println!("untagged 0.25 + 1e-12: {e}"),
        Ok(f) => println!("untagged 0.25 + 1e-12 located, variance {}", f.variance()),
    }
    Ok(())
}
