//! Skorohod integrals of separable integrands by integration by parts.
//!
//! For a term a(t) W_t^{⋄l1} ⋄ M with M built from fixed times,
//!
//! ∫_0^H a(t) W_t^{⋄l1} ⋄ M dW_t
//!     = a(H)/(l1+1) W_H^{⋄(l1+1)} ⋄ M - ∫_0^H a'(s)/(l1+1) W_s^{⋄(l1+1)} ⋄ M ds.

use std::cmp::Ordering;

use super::coeff::CoeffFn;
use super::integrand::IntegrandSpec;
use crate::chaos::{ChaosExpansion, WickMonomial};
use crate::error::{Error, Result};
use crate::gauss_kernel::{Factor, FactorKind, NodeSet, TimePoint};

/// The time integral ∫_0^H g(s) R_s^{⋄power} ⋄ fixed ds, where R is W, L or B.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTerm {
    pub g: CoeffFn,
    pub running: FactorKind,
    pub grid: Option<NodeSet>,
    pub power: u32,
    /// Unit-coefficient monomial in fixed factors.
    pub fixed: WickMonomial,
}

impl TimeTerm {
    fn new(g: CoeffFn, running: FactorKind, grid: Option<NodeSet>, power: u32, fixed: WickMonomial) -> Option<Self> {
        if fixed.is_zero() || g.is_zero() {
            return None;
        }
        let g = g.scale(fixed.coeff());
        let fixed = WickMonomial::new(1.0, fixed.factors().iter().cloned());
        Some(Self { g, running, grid, power, fixed })
    }

    pub fn degree(&self) -> u32 {
        self.power + self.fixed.degree()
    }

    fn shape_cmp(&self, other: &TimeTerm) -> Ordering {
        (self.running, self.power).cmp(&(other.running, other.power)).then_with(|| self.fixed.shape_cmp(&other.fixed)).then_with(|| {
            match (&self.grid, &other.grid) {
                (Some(a), Some(b)) => a.key_cmp(b),
                (a, b) => a.is_some().cmp(&b.is_some()),
            }
        })
    }
}

/// Y = boundary - Σ_j ∫_0^H g_j(s) R_s^{⋄p_j} ⋄ M_j ds.
#[derive(Debug, Clone, PartialEq)]
pub struct SkorohodResult {
    pub boundary: ChaosExpansion,
    pub time_terms: Vec<TimeTerm>,
    pub horizon: TimePoint,
    /// Bound on the squared L2 distance to the untruncated integral.
    pub tail_bound: f64,
}

impl SkorohodResult {
    pub fn new(boundary: ChaosExpansion, time_terms: Vec<TimeTerm>, horizon: TimePoint) -> Self {
        Self { boundary, time_terms: merge_terms(time_terms), horizon, tail_bound: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.boundary.is_zero() && self.time_terms.is_empty()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            boundary: self.boundary.scale(a),
            time_terms: self.time_terms.iter().filter_map(|t| TimeTerm::new(t.g.scale(a), t.running, t.grid.clone(), t.power, t.fixed.clone())).collect(),
            horizon: self.horizon,
            tail_bound: self.tail_bound * a * a,
        }
    }

    pub fn add(&self, other: &SkorohodResult) -> Result<Self> {
        if self.horizon != other.horizon {
            return Err(Error::InvalidSpec("integrals over different horizons".into()));
        }
        let terms = self.time_terms.iter().chain(&other.time_terms).cloned().collect();
        let mut out = Self::new(self.boundary.add(&other.boundary), terms, self.horizon);
        out.tail_bound = (self.tail_bound.sqrt() + other.tail_bound.sqrt()).powi(2);
        Ok(out)
    }

    pub fn sub(&self, other: &SkorohodResult) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// E[Y | W on the grid]: path factors, the running one included, are
    /// replaced by their interpolation and bridges vanish.
    pub fn condition(&self, grid: &NodeSet) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.time_terms.len());
        for t in &self.time_terms {
            match (t.running, &t.grid) {
                (FactorKind::Path, _) => {}
                (FactorKind::Interp, Some(g)) if g == grid => {}
                (FactorKind::Bridge, Some(g)) if g == grid => continue,
                (k, _) => return Err(Error::UnsupportedFactor(format!("running {k} on another grid"))),
            }
            let fixed = ChaosExpansion::new([t.fixed.clone()]).condition(grid)?;
            for m in fixed.terms() {
                terms.extend(TimeTerm::new(t.g.clone(), FactorKind::Interp, Some(grid.clone()), t.power, m.clone()));
            }
        }
        let mut out = Self::new(self.boundary.condition(grid)?, terms, self.horizon);
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    /// Y - E[Y | grid], with the boundary part written through bridges.
    pub fn condition_residual(&self, grid: &NodeSet) -> Result<Self> {
        let cond = self.condition(grid)?;
        let mut terms = self.time_terms.clone();
        terms.extend(cond.time_terms.iter().filter_map(|t| TimeTerm::new(t.g.scale(-1.0), t.running, t.grid.clone(), t.power, t.fixed.clone())));
        let mut out = Self::new(self.boundary.condition_residual(grid)?, terms, self.horizon);
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    /// Largest Wick degree among all parts.
    pub fn max_degree(&self) -> u32 {
        self.time_terms.iter().map(|t| t.degree()).chain([self.boundary.max_degree()]).max().unwrap_or(0)
    }
}

fn merge_terms(mut terms: Vec<TimeTerm>) -> Vec<TimeTerm> {
    terms.sort_by(|a, b| a.shape_cmp(b));
    let mut out: Vec<TimeTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(u) if u.shape_cmp(&t) == Ordering::Equal => u.g = u.g.add(&t.g),
            _ => out.push(t),
        }
    }
    out.retain(|t| !t.g.is_zero());
    out
}

fn fixed_monomial(spec: &IntegrandSpec, l: &[u32]) -> WickMonomial {
    WickMonomial::new(1.0, spec.taus.iter().zip(l).map(|(t, &k)| (Factor::path(*t), k)))
}

/// Skorohod integral of `u` over [0, horizon].
pub fn skorohod_integral(u: &IntegrandSpec) -> Result<SkorohodResult> {
    let h = u.horizon;
    let mut boundary = Vec::new();
    let mut terms = Vec::new();
    for term in &u.terms {
        let q = term.l1 + 1;
        let fixed = fixed_monomial(u, &term.l);
        let end = WickMonomial::single(Factor::path(h), q).wick_mul(&fixed);
        boundary.push(end.scaled(term.coeff.eval(h.value()) / q as f64));
        // the lower boundary term carries W_0 = 0
        terms.extend(TimeTerm::new(term.coeff.derivative().scale(1.0 / q as f64), FactorKind::Path, None, q, fixed));
    }
    let mut out = SkorohodResult::new(ChaosExpansion::new(boundary), terms, h);
    out.tail_bound = u.tail_bound;
    Ok(out)
}

/// f(H, W_H, W_tau) - f(0, 0, W_tau): the boundary side of the Itô formula.
pub fn boundary_increment(f: &IntegrandSpec) -> Result<SkorohodResult> {
    let h = f.horizon;
    let mut terms = Vec::new();
    for term in &f.terms {
        let fixed = fixed_monomial(f, &term.l);
        let at_h = WickMonomial::single(Factor::path(h), term.l1).wick_mul(&fixed).scaled(term.coeff.eval(h.value()));
        terms.push(at_h);
        if term.l1 == 0 {
            terms.push(fixed.scaled(-term.coeff.eval(0.0)));
        }
    }
    Ok(SkorohodResult::new(ChaosExpansion::new(terms), Vec::new(), h))
}

/// ∫_0^H g(s) R_s ... ds for every term of `f`, as a result with no boundary part.
pub fn time_integral(f: &IntegrandSpec) -> SkorohodResult {
    let terms = f.terms.iter().filter_map(|t| TimeTerm::new(t.coeff.scale(-1.0), FactorKind::Path, None, t.l1, fixed_monomial(f, &t.l))).collect();
    SkorohodResult::new(ChaosExpansion::zero(), terms, f.horizon)
}
