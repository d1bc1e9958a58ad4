use std::cmp::Ordering;
use std::fmt;

use super::monomial::{wick_inner, WickMonomial};
use crate::error::{Error, Result};
use crate::gauss_kernel::{Factor, FactorKind, NodeSet, TimePoint};
use crate::numeric::CompensatedSum;

/// Finite sum of Wick monomials, kept sorted with merged coefficients.
///
/// `tail_bound` bounds the squared L2 norm of whatever was truncated away to
/// produce this expansion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChaosExpansion {
    terms: Vec<WickMonomial>,
    tail_bound: f64,
}

impl ChaosExpansion {
    pub fn new(terms: impl IntoIterator<Item = WickMonomial>) -> Self {
        let mut terms: Vec<WickMonomial> = terms.into_iter().filter(|m| !m.is_zero()).collect();
        terms.sort_by(|a, b| a.shape_cmp(b));
        let mut merged: Vec<WickMonomial> = Vec::with_capacity(terms.len());
        for m in terms {
            match merged.last_mut() {
                Some(last) if last.shape_cmp(&m) == Ordering::Equal => {
                    *last = WickMonomial::new(last.coeff() + m.coeff(), last.factors().iter().cloned());
                }
                _ => merged.push(m),
            }
        }
        merged.retain(|m| !m.is_zero());
        Self { terms: merged, tail_bound: 0.0 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with_tail_bound(mut self, bound: f64) -> Self {
        self.tail_bound = bound;
        self
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn terms(&self) -> &[WickMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &ChaosExpansion) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).cloned()).with_tail_bound(tail_sum(self.tail_bound, other.tail_bound))
    }

    pub fn sub(&self, other: &ChaosExpansion) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { terms: self.terms.iter().map(|m| m.scaled(a)).filter(|m| !m.is_zero()).collect(), tail_bound: self.tail_bound * a * a }
    }

    pub fn wick_mul(&self, other: &ChaosExpansion) -> Self {
        Self::new(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.wick_mul(b))))
    }

    /// Component in the k-th Wiener chaos.
    pub fn project(&self, k: u32) -> Self {
        Self { terms: self.terms.iter().filter(|m| m.degree() == k).cloned().collect(), tail_bound: 0.0 }
    }

    /// E[self | W on the grid]: W_t becomes L_t, L_t stays, B_t vanishes.
    pub fn condition(&self, grid: &NodeSet) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for m in &self.terms {
            let fs: Option<Vec<(Factor, u32)>> = m.factors().iter().map(|(f, l)| Ok(interpolate(f, grid)?.map(|g| (g, *l)))).collect::<Result<_>>()?;
            if let Some(fs) = fs {
                terms.push(WickMonomial::new(m.coeff(), fs));
            }
        }
        Ok(Self::new(terms))
    }

    /// self - condition(self), written with bridge factors so that the result
    /// carries no cancellation between nearly equal terms.
    pub fn condition_residual(&self, grid: &NodeSet) -> Result<Self> {
        let mut out = Vec::new();
        for m in self.terms() {
            let fs = m.factors();
            let lifted: Vec<Option<Factor>> = fs.iter().map(|(f, _)| interpolate(f, grid)).collect::<Result<_>>()?;
            // prod X_J - prod L_J = sum_I prod_{J<I} X_J ⋄ (X_I - L_I) ⋄ prod_{J>I} L_J
            for (i, (x, l)) in fs.iter().enumerate() {
                let Some(tail) = fs[i + 1..].iter().zip(&lifted[i + 1..]).map(|((_, lj), lf)| lf.clone().map(|f| (f, *lj))).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                let prefix = WickMonomial::new(m.coeff(), fs[..i].iter().cloned().chain(tail));
                match (x.kind(), &lifted[i]) {
                    (FactorKind::Path, Some(li)) if li.kind() == FactorKind::Interp => {
                        for term in bridge_expand(x.time(), grid, *l)?.terms() {
                            out.push(prefix.wick_mul(term));
                        }
                    }
                    (FactorKind::Bridge, None) => out.push(prefix.wick_mul(&WickMonomial::single(x.clone(), *l))),
                    _ => {}
                }
            }
        }
        Ok(Self::new(out))
    }

    pub fn inner(&self, other: &ChaosExpansion) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for a in &self.terms {
            for b in &other.terms {
                if a.degree() == b.degree() {
                    acc.add(wick_inner(a, b)?);
                }
            }
        }
        Ok(acc.value())
    }

    pub fn norm_sq(&self) -> Result<f64> {
        self.inner(self)
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.norm_sq()?.max(0.0).sqrt())
    }
}

fn tail_sum(a: f64, b: f64) -> f64 {
    // ||x + y||^2 <= (||x|| + ||y||)^2
    (a.sqrt() + b.sqrt()).powi(2)
}

/// E[f | grid] for a single factor; `None` is zero.
fn interpolate(f: &Factor, grid: &NodeSet) -> Result<Option<Factor>> {
    match (f.kind(), f.grid()) {
        (FactorKind::Path, _) => Factor::interp(f.time(), grid).map(Some),
        (FactorKind::Interp, Some(g)) if g == grid => Ok(Some(f.clone())),
        (FactorKind::Bridge, Some(g)) if g == grid => Ok(None),
        (k, _) => Err(Error::UnsupportedFactor(format!("{k}({}) on another grid", f.time()))),
    }
}

/// W_t^{⋄k} - L_t^{⋄k} = B_t ⋄ sum_{j=1..k} W_t^{⋄(k-j)} ⋄ L_t^{⋄(j-1)}.
pub fn bridge_expand(t: TimePoint, grid: &NodeSet, k: u32) -> Result<ChaosExpansion> {
    let b = Factor::bridge(t, grid)?;
    let w = Factor::path(t);
    let l = Factor::interp(t, grid)?;
    Ok(ChaosExpansion::new((1..=k).map(|j| WickMonomial::new(1.0, [(b.clone(), 1), (w.clone(), k - j), (l.clone(), j - 1)]))))
}

/// Finiteness criterion for a Skorohod integral: sum (k+1) ||pi_k u||^2.
pub fn integrability_index(chaos_norms_sq: &[f64]) -> f64 {
    chaos_norms_sq.iter().enumerate().map(|(k, n)| (k as f64 + 1.0) * n).sum()
}

impl fmt::Display for ChaosExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}
