//! Gaussian factors W_t, L_t, B_t and their covariance kernel.

mod factor;
mod nodes;
mod time;

pub use factor::{cov, kernel, Factor, FactorKind};
pub use nodes::{bridge_cov, Cell, NodeSet};
pub use time::{Fractional, TimePoint, TimeTag, BOUNDARY_EPS, FIXED_DIGITS, NAMED_CONSTANTS};

use crate::numeric::factorial;

/// Wick power of a centered Gaussian with variance `var`:
/// h_0 = 1, h_1 = x, h_{k+1} = x h_k - k var h_{k-1}.
pub fn hermite(k: u32, var: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * var * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Integral of E[B_s^{2p}] over cell `index` of `grid`.
pub fn bridge_cell_integral(grid: &NodeSet, index: u64, p: u32) -> f64 {
    let (a, b) = grid.cell_bounds(index);
    let h = b - a;
    // (2p-1)!! h^{p+1} p!^2 / (2p+1)!
    let double_fact = factorial(2 * p) / (2f64.powi(p as i32) * factorial(p));
    double_fact * h.powi(p as i32 + 1) * factorial(p).powi(2) / factorial(2 * p + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: u64) -> NodeSet {
        NodeSet::equidistant(n).unwrap()
    }

    fn rat(p: u64, q: u64) -> TimePoint {
        TimePoint::rational(p, q).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let s = grid(4);
        let b = Factor::bridge(rat(3, 10), &s).unwrap();
        assert!((cov(&b, &b).unwrap() - 0.04).abs() < 1e-15);
        let p = Factor::path(rat(3, 10));
        let l = Factor::interp(rat(3, 10), &s).unwrap();
        assert!((cov(&p, &l).unwrap() - 0.26).abs() < 1e-15);
        assert_eq!(cov(&l, &b).unwrap(), 0.0);
    }

    #[test]
    fn node_interp_is_path() {
        let s = grid(4);
        let l = Factor::interp(rat(1, 2), &s).unwrap();
        assert_eq!(l.kind(), FactorKind::Path);
        assert!(Factor::bridge(rat(1, 2), &s).unwrap().is_null());
    }

    #[test]
    fn mixed_grids_rejected() {
        let a = Factor::interp(rat(1, 3), &grid(2)).unwrap();
        let b = Factor::interp(rat(1, 3), &grid(4)).unwrap();
        assert!(matches!(cov(&a, &b), Err(crate::Error::MixedNodeSets)));
    }

    #[test]
    fn hermite_moments() {
        // He_2 and He_3 with variance v
        assert_eq!(hermite(2, 0.5, 2.0), 4.0 - 0.5);
        assert_eq!(hermite(3, 0.5, 2.0), 8.0 - 3.0 * 0.5 * 2.0);
    }

    #[test]
    fn bridge_cell_integral_matches_h2_over_6() {
        let s = grid(5);
        assert!((bridge_cell_integral(&s, 2, 1) - 0.04 / 6.0).abs() < 1e-17);
        // p = 2: 3 h^3 / 30
        assert!((bridge_cell_integral(&s, 0, 2) - 3.0 * 0.008 / 30.0).abs() < 1e-17);
    }

    fn kind() -> impl Strategy<Value = FactorKind> {
        prop_oneof![Just(FactorKind::Path), Just(FactorKind::Interp), Just(FactorKind::Bridge)]
    }

    proptest! {
        #[test]
        fn kernel_symmetric_and_decomposes(n in 1u64..40, p in 1u64..997, q in 1u64..997, ka in kind(), kb in kind()) {
            let s = grid(n);
            let (ta, tb) = (rat(p, 997), rat(q, 997));
            let a = Factor::of_kind(ka, ta, Some(&s)).unwrap();
            let b = Factor::of_kind(kb, tb, Some(&s)).unwrap();
            prop_assert_eq!(cov(&a, &b).unwrap(), cov(&b, &a).unwrap());
            // W = L + B on both sides
            let wa = Factor::path(ta);
            let la = Factor::interp(ta, &s).unwrap();
            let ba = Factor::bridge(ta, &s).unwrap();
            let lhs = cov(&wa, &b).unwrap();
            let rhs = cov(&la, &b).unwrap() + cov(&ba, &b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-14);
        }

        #[test]
        fn gram_of_three_is_psd(n in 1u64..20, ps in proptest::collection::vec(1u64..499, 3), ks in proptest::collection::vec(kind(), 3)) {
            let s = grid(n);
            let fs: Vec<Factor> = ps.iter().zip(&ks).map(|(&p, &k)| Factor::of_kind(k, rat(p, 499), Some(&s)).unwrap()).collect();
            let g = nalgebra::Matrix3::from_fn(|i, j| cov(&fs[i], &fs[j]).unwrap());
            let eig = g.symmetric_eigenvalues();
            prop_assert!(eig.min() > -1e-12);
        }
    }
}
