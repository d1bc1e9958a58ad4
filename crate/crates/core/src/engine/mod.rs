//! Mean squared error of the conditional-expectation approximation and the
//! constants governing its decay.

mod abs;
mod constants;
mod families;
mod report;

pub use abs::{abs_chaos, abs_coefficients, abs_lower_bound, abs_mse, abs_tail_bound, hypergeom_inner};
pub use constants::{c1, c2, ito_c2, square_integral, Constants};
pub use families::{abs_integrand, ito_exp, sko_exp, xq_moment_bound, xq_mse, xq_variable, xt_integrability_index, xt_process};
pub use report::{mse, mse_of, ErrorComponents, ErrorReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{bridge_expand, wick_inner, ChaosExpansion, WickMonomial};
    use crate::gauss_kernel::{Factor, NodeSet, TimePoint};
    use crate::numeric::factorial;
    use crate::skorohod::{CoeffFn, Coordinate, IntegrandSpec, IntegrandTerm, QuadratureConfig};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn rat(p: u64, q: u64) -> TimePoint {
        TimePoint::rational(p, q).unwrap()
    }

    fn term(coeff: CoeffFn, l1: u32, l: Vec<u32>) -> IntegrandTerm {
        IntegrandTerm { coeff, l1, l }
    }

    fn grid(n: u64) -> NodeSet {
        NodeSet::equidistant(n).unwrap()
    }

    #[test]
    fn exact_simulation_gives_zero() {
        let u = IntegrandSpec::new(
            vec![rat(1, 4)],
            vec![term(CoeffFn::constant(2.0), 0, vec![0]), term(CoeffFn::constant(-0.5), 1, vec![1]), term(CoeffFn::constant(1.0), 2, vec![2])],
        )
        .unwrap();
        for n in [4, 8, 12] {
            let r = mse(&u, &grid(n), &quad()).unwrap();
            assert!(r.e2.abs() < 1e-13, "n = {n}: {}", r.e2);
        }
    }

    #[test]
    fn first_chaos_error_is_bridge_variance() {
        let u = IntegrandSpec::new(vec![rat(3, 10)], vec![term(CoeffFn::constant(1.0), 0, vec![1])]).unwrap();
        let r = mse(&u, &grid(4), &quad()).unwrap();
        assert!((r.e2 - 0.25 * 0.2 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn stationary_square_two_ways() {
        let t = rat(1, 4);
        let g = grid(2);
        let u = IntegrandSpec::new(vec![t], vec![term(CoeffFn::constant(1.0), 0, vec![2])]).unwrap();
        let r = mse(&u, &g, &quad()).unwrap();
        let w1 = ChaosExpansion::new([WickMonomial::single(Factor::path(TimePoint::ONE), 1)]);
        let direct =
            ChaosExpansion::new([WickMonomial::single(Factor::path(t), 2), WickMonomial::single(Factor::interp(t, &g).unwrap(), 2).scaled(-1.0)]).wick_mul(&w1);
        let via_bridge = bridge_expand(t, &g, 2).unwrap().wick_mul(&w1);
        let (a, b) = (direct.norm_sq().unwrap(), via_bridge.norm_sq().unwrap());
        assert!((a - b).abs() < 1e-10);
        assert!((r.e2 - a).abs() < 1e-10, "{} vs {a}", r.e2);
    }

    #[test]
    fn observed_factor_times_linear_coefficient() {
        // t on the grid, so e^2 = E[X^2] Σ_cells ∫ (g - mean g)^2 = E[X^2] / (12 n^2)
        let t = rat(1, 2);
        let u = abs_integrand(t, 6, &CoeffFn::monomial(1.0, 1)).unwrap();
        let x_sq = abs_chaos(t, 6).unwrap().norm_sq().unwrap();
        for n in [2u64, 4, 6] {
            let r = mse(&u, &grid(n), &quad()).unwrap();
            let want = x_sq / (12.0 * (n * n) as f64);
            assert!((r.e2 - want).abs() < 1e-10 * want, "n = {n}: {} vs {want}", r.e2);
        }
        assert!((x_sq - 0.5).abs() < abs_tail_bound(0.5, 6));
    }

    fn sample_specs() -> Vec<IntegrandSpec> {
        let tau = TimePoint::inv_pi();
        vec![
            IntegrandSpec::new(vec![tau], vec![term(CoeffFn::exp(1.0, 0.3), 1, vec![1]), term(CoeffFn::monomial(0.7, 2), 0, vec![2])]).unwrap(),
            IntegrandSpec::new(vec![rat(1, 3), tau], vec![term(CoeffFn::constant(1.0), 0, vec![1, 1]), term(CoeffFn::monomial(-1.0, 1), 2, vec![0, 0])])
                .unwrap(),
            sko_exp(tau, 5).unwrap(),
        ]
    }

    #[test]
    fn projection_identity_holds() {
        for u in sample_specs() {
            for n in [1, 3, 7] {
                let r = mse(&u, &grid(n), &quad()).unwrap();
                assert!(r.components.projection_gap <= 1e-9 * r.components.moment, "{:?}", r.components);
                assert!(r.e2 > 0.0);
            }
        }
    }

    #[test]
    fn nested_refinement_is_monotone() {
        for u in sample_specs() {
            for n in [2u64, 3] {
                let coarse = mse(&u, &grid(n), &quad()).unwrap().e2;
                for k in [2, 3] {
                    let fine = mse(&u, &grid(k * n), &quad()).unwrap().e2;
                    assert!(fine <= coarse + 1e-12, "n = {n}, k = {k}: {fine} > {coarse}");
                }
            }
        }
    }

    #[test]
    fn pre_asymptotic_flag() {
        let u = IntegrandSpec::new(vec![rat(1, 10), rat(1, 5)], vec![term(CoeffFn::constant(1.0), 0, vec![1, 1])]).unwrap();
        assert!(mse(&u, &grid(3), &quad()).unwrap().pre_asymptotic);
        assert!(!mse(&u, &grid(7), &quad()).unwrap().pre_asymptotic);
    }

    #[test]
    fn c1_examples() {
        let tau = rat(3, 10);
        let constant = IntegrandSpec::new(vec![tau], vec![term(CoeffFn::constant(1.5), 1, vec![1])]).unwrap();
        assert!(c1(&constant, &quad()).unwrap().abs() < 1e-15);
        let linear = IntegrandSpec::new(vec![tau], vec![term(CoeffFn::monomial(1.0, 1), 0, vec![1])]).unwrap();
        assert!((c1(&linear, &quad()).unwrap() - (0.3f64 / 12.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn c2_examples() {
        let rational = IntegrandSpec::new(vec![rat(1, 3)], vec![term(CoeffFn::constant(1.0), 0, vec![2])]).unwrap();
        assert_eq!(c2(&rational, &quad()).unwrap().c2, 0.0);
        let tau = TimePoint::inv_pi();
        let a = -0.7;
        let u = IntegrandSpec::new(vec![tau], vec![term(CoeffFn::constant(a), 0, vec![2])]).unwrap();
        let got = c2(&u, &quad()).unwrap();
        // E[(W_tau ⋄ W_1)^2] = tau + tau^2
        let m = WickMonomial::new(2.0 * a, [(Factor::path(tau), 1), (Factor::path(TimePoint::ONE), 1)]);
        let want = 0.5 * wick_inner(&m, &m).unwrap().sqrt();
        assert!((got.c2 - want).abs() < 1e-14);
        assert!((want - a.abs() * (tau.value() + tau.value().powi(2)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn c2_of_exponential_functional() {
        let tau = TimePoint::inv_pi();
        let got = c2(&sko_exp(tau, 18).unwrap(), &quad()).unwrap().c2;
        let want = (1.0 + PI.powi(-2)) * (2.0 / PI).exp();
        assert!((4.0 * got * got - want).abs() < 1e-9 * want, "{} vs {want}", 4.0 * got * got);
    }

    #[test]
    fn ito_c2_examples() {
        let t = TimePoint::inv_pi();
        let got = ito_c2(&ito_exp(t, 18).unwrap(), &quad()).unwrap();
        // ∂_x e^x = e^x and E[e^{2 W_s}] = e^{2s}
        let want = 0.5 * (2.0 * t.value()).exp_m1();
        assert!((4.0 * got * got - want).abs() < 1e-10 * want);

        let linear = IntegrandSpec::new(vec![], vec![term(CoeffFn::constant(-3.0), 1, vec![]), term(CoeffFn::constant(1.0), 0, vec![])])
            .unwrap()
            .with_horizon(rat(2, 3))
            .unwrap();
        assert!((ito_c2(&linear, &quad()).unwrap() - 1.5 * (2.0f64 / 3.0).sqrt()).abs() < 1e-14);

        // x^2 = W_s^{⋄2} + s
        let square = IntegrandSpec::new(vec![], vec![term(CoeffFn::constant(1.0), 2, vec![]), term(CoeffFn::monomial(1.0, 1), 0, vec![])]).unwrap();
        assert!((ito_c2(&square, &quad()).unwrap().powi(2) - 0.5).abs() < 1e-14);

        let stationary = IntegrandSpec::new(vec![rat(1, 2)], vec![term(CoeffFn::constant(1.0), 0, vec![1])]).unwrap();
        assert!(ito_c2(&stationary, &quad()).is_err());
    }

    #[test]
    fn abs_coefficients_match_formula() {
        let t: f64 = 0.37;
        let c = abs_coefficients(t, 5);
        assert!((c[0] - (2.0 * t / PI).sqrt()).abs() < 1e-16);
        for (m, &cm) in c.iter().enumerate() {
            let m = m as u32;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let double_fact = 2f64.powi(m as i32) * factorial(m);
            let want = (2.0 * t / PI).sqrt() * sign * t.powi(-(m as i32)) / ((2.0 * m as f64 - 1.0) * double_fact);
            assert!((cm - want).abs() < 1e-14 * want.abs());
        }
    }

    #[test]
    fn abs_truncation_within_tail_bound() {
        let t = rat(1, 2);
        let x = abs_chaos(t, 50).unwrap();
        let gap = 0.5 - x.norm_sq().unwrap();
        assert!(gap >= 0.0 && gap <= x.tail_bound(), "{gap} vs {}", x.tail_bound());
        // the bound is not vacuous
        assert!(x.tail_bound() < 10.0 * gap);
    }

    #[test]
    fn abs_mse_rational_time_on_grid() {
        let r = abs_mse(rat(1, 3), &grid(6), 40).unwrap();
        assert_eq!(r.e2, 0.0);
    }

    #[test]
    fn abs_mse_matches_generic_engine() {
        let t = TimePoint::inv_pi();
        let m = 5;
        let u = abs_integrand(t, m, &CoeffFn::constant(1.0)).unwrap();
        for n in [3u64, 5, 11] {
            let g = grid(n);
            let closed = abs_mse(t, &g, m).unwrap();
            let generic = mse(&u, &g, &quad()).unwrap();
            assert!((closed.e2 - generic.e2).abs() < 1e-10 * generic.e2, "{} vs {}", closed.e2, generic.e2);
            let proj = (closed.components.moment - generic.components.moment).abs();
            assert!(proj < 1e-10 * generic.components.moment);
        }
    }

    #[test]
    fn abs_first_component_from_hypergeometric_sum() {
        let t = TimePoint::inv_pi();
        let g = grid(4);
        let beta = g.locate(&t).unwrap().bridge_var();
        let (tv, z) = (t.value(), 1.0 - beta / t.value());
        let r = abs_mse(t, &g, 3).unwrap();
        // (W^2 - L^2) ⋄ W_1 for k = 2, with E[W_1 W_t] = E[W_1 L_t] = t
        let k = 2;
        let norm_sq = |i: u32, j: u32| hypergeom_inner(k, i, j, tv, z);
        let chaos = norm_sq(0, 0) - 2.0 * norm_sq(0, 2) + norm_sq(2, 2);
        let with_w1 = chaos
            + (k * k) as f64 * tv * tv * {
                let k1 = k - 1;
                hypergeom_inner(k1, 0, 0, tv, z) - 2.0 * hypergeom_inner(k1, 0, k1, tv, z) + hypergeom_inner(k1, k1, k1, tv, z)
            };
        let c = abs_coefficients(tv, 1)[1];
        let want = c * c * with_w1;
        assert!((r.chaos_components[0] - want).abs() < 1e-13 * want, "{} vs {want}", r.chaos_components[0]);
    }

    fn hypergeom_oracle(k: u32, i: u32, j: u32, t: f64, z: f64) -> f64 {
        let g = NodeSet::general([TimePoint::from_f64(t / z).unwrap()]).unwrap();
        let tp = TimePoint::from_f64(t).unwrap();
        let mono = |i: u32| WickMonomial::new(1.0, [(Factor::path(tp), k - i), (Factor::interp(tp, &g).unwrap(), i)]);
        wick_inner(&mono(i), &mono(j)).unwrap()
    }

    #[test]
    fn hypergeom_example() {
        let got = hypergeom_inner(3, 1, 2, 0.3, 0.9);
        assert!((got - hypergeom_oracle(3, 1, 2, 0.3, 0.9)).abs() < 1e-12 * got);
        assert!((hypergeom_inner(4, 0, 0, 0.3, 1.0) - 24.0 * 0.3f64.powi(4)).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hypergeom_matches_wick_inner(k in 1u32..=10, t in 0.1f64..0.6, frac in 0.05f64..0.95, seed in 0u32..1000) {
            // z in (t, 1) so that the right grid node t/z lies inside (t, 1)
            let z = t + frac * (1.0 - t);
            let (i, j) = (seed % (k + 1), (seed / 11) % (k + 1));
            let got = hypergeom_inner(k, i, j, t, z);
            let want = hypergeom_oracle(k, i, j, t, z);
            prop_assert!((got - want).abs() <= 1e-11 * want.abs(), "{} vs {}", got, want);
            let lo = factorial(k) * t.powi(k as i32) * z.powi(k as i32);
            let hi = factorial(k) * t.powi(k as i32) * z.powi(i.max(j) as i32);
            prop_assert!(lo <= got * (1.0 + 1e-12) && got <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn xt_examples() {
        let t = TimePoint::inv_pi();
        let constant = xt_process(t, 0).unwrap();
        let r = mse(&constant, &grid(3), &quad()).unwrap();
        assert!(r.e2.abs() < 1e-15 && (r.components.moment - 1.0).abs() < 1e-15);
        let mut last = 0.0;
        for k in 0..12 {
            let idx = xt_integrability_index(t, k).unwrap();
            assert!(idx > last && idx < 2.0 * std::f64::consts::E);
            last = idx;
        }
        let u = xt_process(t, 3).unwrap();
        for n in 1..=10 {
            assert!(mse(&u, &grid(n), &quad()).unwrap().e2 > 0.0);
        }
    }

    #[test]
    fn xt_index_matches_engine_norm() {
        let t = TimePoint::inv_pi();
        let u = xt_process(t, 4).unwrap();
        let r = mse(&u, &grid(1), &quad()).unwrap();
        let idx = xt_integrability_index(t, 4).unwrap();
        // E[(W_tau^{⋄k} ⋄ W_1)^2] = k! tau^k (1 + k tau) <= (k+1)! tau^k
        let exact: f64 = (0..=4u32)
            .map(|k| {
                let tau = t.frac_multiple(k as u64).unwrap().value();
                tau.powi(k as i32) * (1.0 + k as f64 * tau) / factorial(k)
            })
            .sum();
        assert!((r.components.moment - exact).abs() < 1e-12 * exact);
        assert!(exact <= idx);
    }

    #[test]
    fn xq_examples() {
        let t = TimePoint::inv_sqrt2();
        let coeffs = |q: f64| -> Vec<f64> { xq_variable(t, q, 6).unwrap().terms.iter().map(|term| term.coeff.eval(0.0)).collect() };
        let (a, b) = (coeffs(0.1), coeffs(0.45));
        assert!(a.iter().zip(&b).all(|(x, y)| y < x));
        assert!(xq_variable(t, 0.5, 3).is_err());
        assert!(xq_variable(t, -0.5, 3).is_err());
        let b200 = xq_moment_bound(t, 0.0, 200).unwrap();
        let b400 = xq_moment_bound(t, 0.0, 400).unwrap();
        assert!(b400 >= b200 && b400 - b200 < 1e-3);
        let u = xq_variable(t, 0.0, 4).unwrap();
        let r = mse(&u, &grid(1), &quad()).unwrap();
        let b = xq_moment_bound(t, 0.0, 4).unwrap();
        assert!(r.components.moment <= b && r.components.moment > 0.5 * b);
    }

    #[test]
    fn xq_mse_matches_generic_engine() {
        let t = TimePoint::inv_sqrt2();
        for q in [-0.3, 0.0, 0.4] {
            let u = xq_variable(t, q, 5).unwrap();
            for n in [3u64, 5, 11] {
                let g = grid(n);
                let closed = xq_mse(t, q, &g, 5).unwrap();
                let generic = mse(&u, &g, &quad()).unwrap();
                assert!((closed.e2 - generic.e2).abs() < 1e-10 * generic.e2, "q = {q}, n = {n}: {} vs {}", closed.e2, generic.e2);
                assert!((closed.components.moment - generic.components.moment).abs() < 1e-10 * generic.components.moment);
                assert!(closed.components.projection_gap < 1e-12);
            }
        }
        assert!(xq_mse(t, 0.5, &grid(2), 3).is_err());
        assert!(xq_mse(t, -0.3, &grid(2), 3).unwrap().truncation_bound.is_infinite());
    }

    #[test]
    fn partial_x_in_fixed_coordinate() {
        let tau = rat(1, 5);
        let u = IntegrandSpec::new(vec![tau], vec![term(CoeffFn::constant(1.0), 0, vec![3])]).unwrap();
        let d = u.partial_x(Coordinate::Tau(0)).unwrap();
        assert_eq!(d.terms[0].l, vec![2]);
        assert_eq!(d.terms[0].coeff.eval(0.3), 3.0);
    }
}
