use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::pairing::pairing_sum;
use crate::error::{Error, Result};
use crate::gauss_kernel::{cov, Factor};
use crate::numeric::MAX_DEGREE;

pub type Factors = SmallVec<[(Factor, u32); 4]>;

/// c * X_1^{⋄l_1} ⋄ ... ⋄ X_r^{⋄l_r} with distinct, sorted factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WickMonomial {
    coeff: f64,
    factors: Factors,
}

impl WickMonomial {
    /// Sorts and merges factors. A zero-variance factor with positive
    /// exponent makes the whole monomial zero.
    pub fn new(coeff: f64, factors: impl IntoIterator<Item = (Factor, u32)>) -> Self {
        let mut fs: Factors = factors.into_iter().filter(|(_, l)| *l > 0).collect();
        fs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Factors = SmallVec::with_capacity(fs.len());
        for (f, l) in fs {
            match merged.last_mut() {
                Some((g, m)) if *g == f => *m += l,
                _ => merged.push((f, l)),
            }
        }
        if merged.iter().any(|(f, _)| f.is_null()) {
            return Self { coeff: 0.0, factors: SmallVec::new() };
        }
        Self { coeff, factors: merged }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeff: c, factors: SmallVec::new() }
    }

    pub fn single(f: Factor, power: u32) -> Self {
        Self::new(1.0, [(f, power)])
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn factors(&self) -> &[(Factor, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, l)| l).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { coeff: self.coeff * a, factors: self.factors.clone() }
    }

    pub fn wick_mul(&self, other: &WickMonomial) -> Self {
        Self::new(self.coeff * other.coeff, self.factors.iter().chain(&other.factors).cloned())
    }

    /// Same factors and exponents, coefficients ignored.
    pub fn shape_cmp(&self, other: &WickMonomial) -> Ordering {
        let lhs = self.factors.iter().map(|(f, l)| (f, *l));
        let rhs = other.factors.iter().map(|(f, l)| (f, *l));
        lhs.cmp(rhs)
    }
}

impl fmt::Display for WickMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for (x, l) in &self.factors {
            write!(f, " ⋄ {x}^{l}")?;
        }
        Ok(())
    }
}

/// E[(c1 M1)(c2 M2)] including coefficients.
pub fn wick_inner(a: &WickMonomial, b: &WickMonomial) -> Result<f64> {
    let d = a.degree();
    if d != b.degree() || a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    if d > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(d));
    }
    let (fa, fb) = (&a.factors, &b.factors);
    let mut c: SmallVec<[f64; 16]> = SmallVec::with_capacity(fa.len() * fb.len());
    for (x, _) in fa {
        for (y, _) in fb {
            c.push(cov(x, y)?);
        }
    }
    let rows: SmallVec<[u32; 4]> = fa.iter().map(|(_, l)| *l).collect();
    let cols: SmallVec<[u32; 4]> = fb.iter().map(|(_, l)| *l).collect();
    Ok(a.coeff * b.coeff * pairing_sum(&c, &rows, &cols))
}
