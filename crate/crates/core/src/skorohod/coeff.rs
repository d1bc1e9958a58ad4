use serde::{Deserialize, Serialize};

/// One term c s^p e^{r s}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffTerm {
    pub c: f64,
    pub p: u32,
    pub r: f64,
}

/// Finite sum of terms c s^p e^{r s}; closed under differentiation and
/// antidifferentiation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffFn {
    terms: Vec<CoeffTerm>,
}

impl CoeffFn {
    pub fn new(terms: impl IntoIterator<Item = CoeffTerm>) -> Self {
        let mut terms: Vec<CoeffTerm> = terms.into_iter().filter(|t| t.c != 0.0).collect();
        terms.sort_by(|a, b| a.p.cmp(&b.p).then(a.r.total_cmp(&b.r)));
        let mut out: Vec<CoeffTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(u) if u.p == t.p && u.r == t.r => u.c += t.c,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.c != 0.0);
        Self { terms: out }
    }

    pub fn constant(c: f64) -> Self {
        Self::new([CoeffTerm { c, p: 0, r: 0.0 }])
    }

    pub fn monomial(c: f64, p: u32) -> Self {
        Self::new([CoeffTerm { c, p, r: 0.0 }])
    }

    pub fn exp(c: f64, r: f64) -> Self {
        Self::new([CoeffTerm { c, p: 0, r }])
    }

    pub fn terms(&self) -> &[CoeffTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.p == 0 && t.r == 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.c * s.powi(t.p as i32) * (t.r * s).exp()).sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(self.terms.iter().map(|t| CoeffTerm { c: t.c * a, ..*t }))
    }

    pub fn add(&self, other: &CoeffFn) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).copied())
    }

    pub fn mul(&self, other: &CoeffFn) -> Self {
        Self::new(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| CoeffTerm { c: a.c * b.c, p: a.p + b.p, r: a.r + b.r })))
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.terms.iter().flat_map(|t| {
            let power = (t.p > 0).then(|| CoeffTerm { c: t.c * t.p as f64, p: t.p - 1, r: t.r });
            let exp = (t.r != 0.0).then_some(CoeffTerm { c: t.c * t.r, ..*t });
            power.into_iter().chain(exp)
        }))
    }

    /// The antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.r == 0.0 {
                out.push(CoeffTerm { c: t.c / (t.p + 1) as f64, p: t.p + 1, r: 0.0 });
                continue;
            }
            // int s^p e^{rs} = e^{rs} sum_j (-1)^j p!/(p-j)! s^{p-j} / r^{j+1}
            let mut falling = 1.0;
            for j in 0..=t.p {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.push(CoeffTerm { c: t.c * sign * falling / t.r.powi(j as i32 + 1), p: t.p - j, r: t.r });
                falling *= (t.p - j) as f64;
            }
            let at_zero = if t.p % 2 == 0 { 1.0 } else { -1.0 } * crate::numeric::factorial(t.p) / t.r.powi(t.p as i32 + 1);
            out.push(CoeffTerm { c: -t.c * at_zero, p: 0, r: 0.0 });
        }
        Self::new(out)
    }
}
