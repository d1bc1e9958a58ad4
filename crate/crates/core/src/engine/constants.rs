use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::chaos::{wick_inner, WickMonomial};
use crate::error::{Error, Result};
use crate::gauss_kernel::{Factor, TimePoint};
use crate::numeric::CompensatedSum;
use crate::skorohod::{second_moment, skorohod_integral, Coordinate, IntegrandSpec, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    /// Contribution of each irrational fixed time to 4 c2^2, by index.
    pub per_tau: Vec<(usize, f64)>,
}

/// ∫_0^H E[(Σ_k a_k(s) W_s^{⋄l1_k} ⋄ M_k)^2] ds.
pub fn square_integral(f: &IntegrandSpec, quad: &QuadratureConfig) -> Result<f64> {
    if f.terms.is_empty() {
        return Ok(0.0);
    }
    let h = f.horizon.value();
    let mut cuts: Vec<f64> = f.taus.iter().map(|t| t.value()).filter(|&t| t > 0.0 && t < h).collect();
    cuts.extend([0.0, h]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let integrand = |s: f64| -> Result<f64> {
        let running = Factor::path(TimePoint::from_f64(s)?);
        let monos: Vec<WickMonomial> = f
            .terms
            .iter()
            .map(|t| {
                let fixed = f.taus.iter().zip(&t.l).map(|(tau, &l)| (Factor::path(*tau), l));
                WickMonomial::new(t.coeff.eval(s), fixed.chain([(running.clone(), t.l1)]))
            })
            .collect();
        let mut acc = CompensatedSum::new();
        for a in &monos {
            for b in &monos {
                acc.add(wick_inner(a, b)?);
            }
        }
        Ok(acc.value())
    };
    let integrate = |order: usize, level: u32| -> Result<f64> {
        let gl = GaussLegendre::new(order).expect("order >= 2");
        let pieces = 1 << level;
        let mut acc = CompensatedSum::new();
        for w in cuts.windows(2) {
            let step = (w[1] - w[0]) / pieces as f64;
            for i in 0..pieces {
                let a = w[0] + step * i as f64;
                for &(x, wx) in gl.as_node_weight_pairs() {
                    acc.add(0.5 * step * wx * integrand(a + 0.5 * step * (x + 1.0))?);
                }
            }
        }
        Ok(acc.value())
    };
    for level in 0..=quad.max_level {
        let (lo, hi) = (integrate(quad.order, level)?, integrate(2 * quad.order, level)?);
        if (lo - hi).abs() <= quad.rel_tol * hi.abs() + quad.abs_tol {
            return Ok(hi);
        }
        if level == quad.max_level {
            return Err(Error::QuadratureDivergence { coarse: lo, fine: hi });
        }
    }
    unreachable!()
}

/// Constant of the n^{-1} regime: (1/√12) (∫ E[(L f)(s)^2] ds)^{1/2}.
pub fn c1(u: &IntegrandSpec, quad: &QuadratureConfig) -> Result<f64> {
    Ok((square_integral(&u.wick_l(), quad)? / 12.0).max(0.0).sqrt())
}

/// Constant of the n^{-1/2} regime from irrational fixed times.
/// Untagged times count as irrational.
pub fn c2(u: &IntegrandSpec, quad: &QuadratureConfig) -> Result<Constants> {
    let mut per_tau = Vec::new();
    let mut acc = CompensatedSum::new();
    for (i, tau) in u.taus.iter().enumerate() {
        if tau.is_exact_rational() {
            continue;
        }
        let y = skorohod_integral(&u.partial_x(Coordinate::Tau(i))?)?;
        let m = second_moment(&y, quad)?;
        per_tau.push((i, m));
        acc.add(m);
    }
    Ok(Constants { c1: c1(u, quad)?, c2: 0.5 * acc.value().max(0.0).sqrt(), per_tau })
}

/// Constant for adapted integrands stopped at a time off the grid:
/// ½ (∫_0^H E[(∂_x f)(s, W_s)^2] ds)^{1/2}.
pub fn ito_c2(f: &IntegrandSpec, quad: &QuadratureConfig) -> Result<f64> {
    if !f.is_adapted() {
        return Err(Error::InvalidSpec("expected an adapted integrand".into()));
    }
    Ok(0.5 * square_integral(&f.partial_x(Coordinate::Running)?, quad)?.max(0.0).sqrt())
}
