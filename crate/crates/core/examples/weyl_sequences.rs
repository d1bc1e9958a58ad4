//! Grid sizes that push a fixed irrational time to the middle of its cell.

use wicklab::gauss_kernel::TimePoint;
use wicklab::weyl::{convergent_seeds, rational_indices, weyl_records};

fn main() -> wicklab::Result<()> {
    for name in ["inv_pi", "inv_sqrt2", "inv_e"] {
        let t = TimePoint::named(name)?;
        let s = weyl_records(t, 1_000_000)?;
        println!("{name}: {} records up to 10^6", s.len());
        println!("{:>9} {:>12} {:>12} {:>10}", "n", "{nt}", "gap", "4n var B");
        let ratios = s.bridge_ratios();
        for (i, ratio) in ratios.iter().enumerate().skip(s.len().saturating_sub(6)) {
            println!("{:>9} {:>12.9} {:>12.3e} {:>10.8}", s.indices[i], s.fracs[i], s.gaps[i], ratio);
        }
        println!("continued-fraction seeds: {:?}\n", convergent_seeds(t, 1_000_000)?);
    }
    println!("t = 2/7 sits on a node at n = {:?}", rational_indices(TimePoint::rational(2, 7)?, 5)?);
    Ok(())
}
