//! Built-in integrands.

use std::f64::consts::PI;

use super::abs::{abs_coefficients, chaos_parts};
use super::report::{ErrorComponents, ErrorReport};
use crate::error::{Error, Result};
use crate::gauss_kernel::{NodeSet, TimePoint};
use crate::numeric::{factorial, CompensatedSum};
use crate::skorohod::{CoeffFn, IntegrandSpec, IntegrandTerm};

/// u_s = g(s) |W_t| with |W_t| truncated after chaos 2M.
pub fn abs_integrand(t: TimePoint, m_max: u32, g: &CoeffFn) -> Result<IntegrandSpec> {
    if t.value() <= 0.0 {
        return Err(Error::InvalidSpec("|W_t| needs t > 0".into()));
    }
    let terms =
        abs_coefficients(t.value(), m_max).into_iter().enumerate().map(|(m, c)| IntegrandTerm { coeff: g.scale(c), l1: 0, l: vec![2 * m as u32] }).collect();
    let g_sq = g.mul(g).antiderivative().eval(1.0);
    // ||δ(v)||^2 <= Σ_k (k+1) ||π_k v||^2 applied to the dropped chaoses
    let m = m_max.max(1) as f64;
    let tail = g_sq * (2.0 * t.value() / PI) / PI.sqrt() * (2.0 + 1.0 / m) / (2.0 - 1.0 / m).powi(2) * 2.0 / m.sqrt();
    Ok(IntegrandSpec::new(vec![t], terms)?.with_tail_bound(tail))
}

/// f(t, x) = e^x stopped at `horizon`, in Wick form e^{t/2} Σ_k W_t^{⋄k}/k!.
pub fn ito_exp(horizon: TimePoint, m_max: u32) -> Result<IntegrandSpec> {
    let terms = (0..=m_max).map(|k| IntegrandTerm { coeff: CoeffFn::exp(1.0 / factorial(k), 0.5), l1: k, l: vec![] }).collect();
    let h = horizon.value();
    // E ∫ (e^{s/2} Σ_{k>M} W_s^{⋄k}/k!)^2 ds <= h e^{2h} h^{M+1}/(M+1)!
    let tail = h * (2.0 * h).exp() * h.powi(m_max as i32 + 1) / factorial(m_max + 1);
    Ok(IntegrandSpec::new(vec![], terms)?.with_horizon(horizon)?.with_tail_bound(tail))
}

/// u = e^{W_tau} = e^{tau/2} Σ_k W_tau^{⋄k}/k!.
pub fn sko_exp(tau: TimePoint, m_max: u32) -> Result<IntegrandSpec> {
    let terms = (0..=m_max).map(|k| IntegrandTerm { coeff: CoeffFn::constant((tau.value() / 2.0).exp() / factorial(k)), l1: 0, l: vec![k] }).collect();
    let t = tau.value();
    // e^t Σ_{k>M} t^k (1 + k t)/k!
    let tail = t.exp() * t.exp() * (t.powi(m_max as i32 + 1) / factorial(m_max + 1) + t * t * t.powi(m_max as i32) / factorial(m_max));
    Ok(IntegrandSpec::new(vec![tau], terms)?.with_tail_bound(tail))
}

/// X_T = Σ_{k<=K} W_{{kT}}^{⋄k}/k!, a functional of infinitely many times.
pub fn xt_process(t: TimePoint, k_max: u32) -> Result<IntegrandSpec> {
    if !t.is_irrational() {
        log::warn!("X_T with a time that is not tagged irrational");
    }
    let taus: Vec<TimePoint> = (1..=k_max as u64).map(|k| t.frac_multiple(k)).collect::<Result<_>>()?;
    let mut terms = vec![IntegrandTerm { coeff: CoeffFn::constant(1.0), l1: 0, l: vec![0; taus.len()] }];
    for k in 1..=k_max {
        let mut l = vec![0; taus.len()];
        l[k as usize - 1] = k;
        terms.push(IntegrandTerm { coeff: CoeffFn::constant(1.0 / factorial(k)), l1: 0, l });
    }
    // Σ_{k>K} (k+1)/k!, consecutive ratios at most 3/4
    let tail = 4.0 * (k_max + 2) as f64 / factorial(k_max + 1);
    Ok(IntegrandSpec::new(taus, terms)?.with_tail_bound(tail))
}

/// Σ_{k<=K} (k+1)/k! {kT}^k.
pub fn xt_integrability_index(t: TimePoint, k_max: u32) -> Result<f64> {
    let mut acc = 1.0;
    for k in 1..=k_max {
        let tau = t.frac_multiple(k as u64)?.value();
        acc += (k + 1) as f64 / factorial(k) * tau.powi(k as i32);
    }
    Ok(acc)
}

fn check_q(q: f64) -> Result<()> {
    if q > -0.5 && q < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("q = {q} outside (-1/2, 1/2)")))
    }
}

/// Bound on what the chaoses m > M add to E[(X_q ⋄ W_1)^2]: with {mT} <= 1
/// each is at most (2m+1) c_m (2m)^{-2-2q}, c_m <= 1/√(πm). Infinite when
/// the bound does not sum.
fn xq_tail_bound(q: f64, m_max: u32) -> f64 {
    if q <= -0.25 {
        return f64::INFINITY;
    }
    let m = m_max.max(1) as f64;
    let p = 1.5 + 2.0 * q;
    (2.0 + 1.0 / m) * 2f64.powf(-2.0 - 2.0 * q) / PI.sqrt() * m.powf(1.0 - p) / (p - 1.0)
}

fn xq_coefficient(m: u32, q: f64) -> f64 {
    // (2m)!! = 2^m m!
    1.0 / ((2.0 * m as f64).powf(1.0 + q) * 2f64.powi(m as i32) * factorial(m))
}

/// X_q = Σ_{1<=m<=M} W_{{mT}}^{⋄2m} / ((2m)^{1+q} (2m)!!).
pub fn xq_variable(t: TimePoint, q: f64, m_max: u32) -> Result<IntegrandSpec> {
    check_q(q)?;
    let taus: Vec<TimePoint> = (1..=m_max as u64).map(|m| t.frac_multiple(m)).collect::<Result<_>>()?;
    let terms = (1..=m_max)
        .map(|m| {
            let mut l = vec![0; taus.len()];
            l[m as usize - 1] = 2 * m;
            IntegrandTerm { coeff: CoeffFn::constant(xq_coefficient(m, q)), l1: 0, l }
        })
        .collect();
    let tail = xq_tail_bound(q, m_max);
    Ok(IntegrandSpec::new(taus, terms)?.with_tail_bound(tail))
}

/// Σ_{1<=m<=M} (2m+1)! / ((2m)^{2+2q} (2m)!!^2) {mT}^{2m}, the bound on E[(X_q ⋄ W_1)^2].
pub fn xq_moment_bound(t: TimePoint, q: f64, m_max: u32) -> Result<f64> {
    let mut acc = 0.0;
    for m in 1..=m_max {
        let tau = t.frac_multiple(m as u64)?.value();
        // (2m+1)!/(2m)!!^2 = (2m+1) binom(2m, m)/4^m, built as a running product
        let mut c = 1.0;
        for j in 1..=m {
            c *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        acc += (2 * m + 1) as f64 * c * (2.0 * m as f64).powf(-2.0 - 2.0 * q) * tau.powi(2 * m as i32);
    }
    Ok(acc)
}
/// e_n^2 for X_q ⋄ W_1 chaos by chaos, in O(M): the m-th chaos only sees
/// the bridge at {mT}, so M can be far larger than the generic engine allows.
pub fn xq_mse(t: TimePoint, q: f64, grid: &NodeSet, m_max: u32) -> Result<ErrorReport> {
    check_q(q)?;
    let mut components = Vec::with_capacity(m_max as usize);
    let (mut e2, mut moment, mut projected) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut c = 1.0;
    for m in 1..=m_max {
        c *= (2 * m - 1) as f64 / (2 * m) as f64;
        let tau = t.frac_multiple(m as u64)?;
        let tv = tau.value();
        // a_m^2 (2m)! tau^{2m} = c_m (2m)^{-2-2q} tau^{2m}
        let w = c * (2.0 * m as f64).powf(-2.0 - 2.0 * q) * tv.powi(2 * m as i32);
        if w == 0.0 {
            components.push(0.0);
            continue;
        }
        let beta = grid.locate(&tau)?.bridge_var();
        let (comp, full, proj) = chaos_parts(w, 2 * m, tv, beta);
        components.push(comp);
        e2.add(comp);
        moment.add(full);
        projected.add(proj);
    }
    let e2 = e2.value();
    let gap = (e2 - (moment.value() - projected.value())).abs();
    let comps = ErrorComponents { boundary: e2, cross: 0.0, double: 0.0, moment: moment.value(), projected_moment: projected.value(), projection_gap: gap };
    let mut report = ErrorReport::from_e2(grid.len(), e2, xq_tail_bound(q, m_max), comps);
    report.chaos_components = components;
    Ok(report)
}
