//! |W_t| through its Wiener chaos expansion.
//!
//! |W_t| = √(2t/π) Σ_m (-1)^{m+1} t^{-m} / ((2m-1)(2m)!!) W_t^{⋄2m}.
//! With c_m = binom(2m, m)/4^m the m-th term has squared norm
//! (2t/π) c_m/(2m-1)^2, and c_m <= 1/√(πm) controls every tail below.

use std::f64::consts::PI;

use super::report::{ErrorComponents, ErrorReport};
use crate::chaos::{ChaosExpansion, WickMonomial};
use crate::error::{Error, Result};
use crate::gauss_kernel::{Factor, NodeSet, TimePoint};
use crate::numeric::{factorial, CompensatedSum};

/// Coefficients of W_t^{⋄2m} for m = 0..=M.
pub fn abs_coefficients(t: f64, m_max: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(m_max as usize + 1);
    let mut c = (2.0 * t / PI).sqrt();
    out.push(c);
    for m in 1..=m_max {
        // ratio of consecutive coefficients
        let mf = m as f64;
        c *= -(2.0 * mf - 3.0) / ((2.0 * mf - 1.0) * t * 2.0 * mf);
        out.push(c);
    }
    out
}

/// Bound on Σ_{m>M} (2t/π) c_m / (2m-1)^2.
pub fn abs_tail_bound(t: f64, m_max: u32) -> f64 {
    let m = m_max.max(1) as f64;
    (2.0 * t / PI) / PI.sqrt() * (2.0 / 3.0) * m.powf(-1.5) / (2.0 - 1.0 / m).powi(2)
}

/// Truncated expansion of |W_t| with its tail bound.
pub fn abs_chaos(t: TimePoint, m_max: u32) -> Result<ChaosExpansion> {
    if t.value() <= 0.0 {
        return Err(Error::InvalidSpec("|W_t| needs t > 0".into()));
    }
    let w = Factor::path(t);
    let terms = abs_coefficients(t.value(), m_max).into_iter().enumerate().map(|(m, c)| WickMonomial::new(c, [(w.clone(), 2 * m as u32)]));
    Ok(ChaosExpansion::new(terms).with_tail_bound(abs_tail_bound(t.value(), m_max)))
}

/// Lower bound t^{3/4} n^{-1/4} / √(2π) on e_n along well-placed grids.
pub fn abs_lower_bound(t: f64, n: u64) -> f64 {
    t.powf(0.75) / (2.0 * PI).sqrt() * (n as f64).powf(-0.25)
}

/// e_n^2 for |W_t| ⋄ W_1 summed chaos by chaos in closed form.
///
/// Each chaos contributes (2t/π) c_m/(2m-1)^2 [(1 - z^{2m}) + 2mt (1 - z^{2m-1})]
/// with z = 1 - var(B_t)/t; the brackets come from E[W_t L_t] = var(L_t) and
/// E[W_1 L_t] = t. Costs O(M), so M can be far beyond the point where
/// materialising the expansion would be feasible.
pub fn abs_mse(t: TimePoint, grid: &NodeSet, m_max: u32) -> Result<ErrorReport> {
    let tv = t.value();
    let cell = grid.locate(&t)?;
    let beta = cell.bridge_var();
    let scale = 2.0 * tv / PI;
    let mut components = Vec::with_capacity(m_max as usize);
    let (mut e2, mut moment, mut projected) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    // chaos 0 is a multiple of W_1, which the grid observes
    moment.add(scale);
    projected.add(scale);
    let mut c = 1.0;
    for m in 1..=m_max {
        let mf = m as f64;
        c *= (2.0 * mf - 1.0) / (2.0 * mf);
        let w = scale * c / (2.0 * mf - 1.0).powi(2);
        let (comp, full, proj) = chaos_parts(w, 2 * m, tv, beta);
        components.push(comp);
        e2.add(comp);
        moment.add(full);
        projected.add(proj);
    }
    let tail = abs_e2_tail_bound(tv, m_max);
    let e2 = e2.value();
    let gap = (e2 - (moment.value() - projected.value())).abs();
    let comps = ErrorComponents { boundary: e2, cross: 0.0, double: 0.0, moment: moment.value(), projected_moment: projected.value(), projection_gap: gap };
    let mut report = ErrorReport::from_e2(grid.len(), e2, tail, comps);
    report.chaos_components = components;
    Ok(report)
}

/// For X = a W_t^{⋄k} ⋄ W_1 and w = a^2 k! t^k, so that E[X^2] = w (1 + k t):
/// the error, E[X^2] and E[E[X | grid]^2] when var(B_t) = beta.
pub(crate) fn chaos_parts(w: f64, k: u32, t: f64, beta: f64) -> (f64, f64, f64) {
    let k = k as f64;
    let ln_z = (-beta / t).ln_1p();
    let z = 1.0 - beta / t;
    let err = if beta == 0.0 { 0.0 } else { w * (-(k * ln_z).exp_m1() - k * t * ((k - 1.0) * ln_z).exp_m1()) };
    (err, w * (1.0 + k * t), w * ((k - 1.0) * ln_z).exp() * (z + k * t))
}

/// Bound on Σ_{m>M} of the chaos contributions to e^2.
fn abs_e2_tail_bound(t: f64, m_max: u32) -> f64 {
    let m = m_max.max(1) as f64;
    let k = (2.0 * t / PI) / (PI.sqrt() * (2.0 - 1.0 / m).powi(2));
    k * ((2.0 / 3.0) * m.powf(-1.5) + 4.0 * t * m.powf(-0.5))
}

/// E[(W_t^{⋄(k-i)} ⋄ L_t^{⋄i}) (W_t^{⋄(k-j)} ⋄ L_t^{⋄j})] for z = 1 - var(B_t)/t.
pub fn hypergeom_inner(k: u32, i: u32, j: u32, t: f64, z: f64) -> f64 {
    assert!(i <= k && j <= k, "powers exceed degree");
    let lo = k.saturating_sub(i + j);
    let hi = k - i.max(j);
    let mut acc = CompensatedSum::new();
    for l in lo..=hi {
        let ways = factorial(k - i) * factorial(k - j) * factorial(i) * factorial(j)
            / (factorial(l) * factorial(k - i - l) * factorial(k - j - l) * factorial(i + j + l - k));
        acc.add(ways * t.powi(k as i32) * z.powi((k - l) as i32));
    }
    acc.value()
}
