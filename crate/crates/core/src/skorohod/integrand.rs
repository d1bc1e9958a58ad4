//! Integrands u_t = sum_k a_k(t) W_t^{⋄l1} ⋄ prod_i W_{tau_i}^{⋄l_i}.

use serde::{Deserialize, Serialize};

use super::coeff::{CoeffFn, CoeffTerm};
use crate::error::{Error, Result};
use crate::gauss_kernel::{TimePoint, TimeTag};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandTerm {
    pub coeff: CoeffFn,
    /// Wick power of the running value W_t.
    pub l1: u32,
    /// Wick powers of the fixed values W_{tau_i}.
    pub l: Vec<u32>,
}

/// Integrand over [0, horizon].
///
/// `tail_bound` bounds E[(∫u dW - ∫u_trunc dW)^2] for whatever was cut off
/// when the integrand was truncated; zero for exact integrands.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandSpec {
    pub taus: Vec<TimePoint>,
    pub terms: Vec<IntegrandTerm>,
    pub horizon: TimePoint,
    pub tail_bound: f64,
}

/// Which argument of f(t, x_1, x_2, ...) to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Running,
    Tau(usize),
}

impl IntegrandSpec {
    pub fn new(taus: Vec<TimePoint>, terms: Vec<IntegrandTerm>) -> Result<Self> {
        let spec = Self { taus, terms, horizon: TimePoint::ONE, tail_bound: 0.0 };
        spec.validate()?;
        Ok(spec.canonical())
    }

    pub fn with_horizon(mut self, horizon: TimePoint) -> Result<Self> {
        if horizon.value() <= 0.0 {
            return Err(Error::InvalidSpec("horizon must be positive".into()));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_tail_bound(mut self, bound: f64) -> Self {
        self.tail_bound = bound;
        self
    }

    /// Integrand with no fixed times, i.e. adapted.
    pub fn is_adapted(&self) -> bool {
        self.terms.iter().all(|t| t.l.iter().all(|&l| l == 0))
    }

    fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.l.len() != self.taus.len() {
                return Err(Error::InvalidSpec(format!("term has {} fixed powers for {} times", t.l.len(), self.taus.len())));
            }
        }
        for (i, a) in self.taus.iter().enumerate() {
            if self.taus[..i].iter().any(|b| b.same_point(a)) {
                return Err(Error::InvalidSpec(format!("time {a} listed twice")));
            }
            if a.value() <= 0.0 {
                return Err(Error::InvalidSpec("fixed times must be positive".into()));
            }
        }
        Ok(())
    }

    /// Terms sorted by powers with equal powers merged.
    fn canonical(mut self) -> Self {
        self.terms.sort_by(|a, b| (a.l1, &a.l).cmp(&(b.l1, &b.l)));
        let mut out: Vec<IntegrandTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            match out.last_mut() {
                Some(u) if u.l1 == t.l1 && u.l == t.l => u.coeff = u.coeff.add(&t.coeff),
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        self.terms = out;
        self
    }

    fn map_terms(&self, f: impl Fn(&IntegrandTerm) -> Option<IntegrandTerm>) -> Self {
        let terms = self.terms.iter().filter_map(f).collect();
        Self { terms, ..self.clone() }.canonical()
    }

    /// ∂f/∂x_i in Wick coordinates: the power drops by one and the coefficient
    /// picks up the old power.
    pub fn partial_x(&self, coord: Coordinate) -> Result<Self> {
        if let Coordinate::Tau(i) = coord {
            if i >= self.taus.len() {
                return Err(Error::InvalidSpec(format!("no fixed time with index {i}")));
            }
        }
        Ok(self.map_terms(|t| match coord {
            Coordinate::Running => (t.l1 > 0).then(|| IntegrandTerm { coeff: t.coeff.scale(t.l1 as f64), l1: t.l1 - 1, l: t.l.clone() }),
            Coordinate::Tau(i) => (t.l[i] > 0).then(|| {
                let mut l = t.l.clone();
                l[i] -= 1;
                IntegrandTerm { coeff: t.coeff.scale(t.l[i] as f64), l1: t.l1, l }
            }),
        }))
    }

    /// The operator L = ∂_t + ½∂_x^2 in Wick coordinates. The heat-equation
    /// parts cancel against the Wick renormalisation, leaving a'(t).
    pub fn wick_l(&self) -> Self {
        self.map_terms(|t| {
            let d = t.coeff.derivative();
            (!d.is_zero()).then(|| IntegrandTerm { coeff: d, l1: t.l1, l: t.l.clone() })
        })
    }

    /// Scale every coefficient.
    pub fn scale(&self, a: f64) -> Self {
        self.map_terms(|t| Some(IntegrandTerm { coeff: t.coeff.scale(a), ..t.clone() }))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpecJson::from(self)).expect("spec serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&SpecJson::from(self)).expect("spec serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TimeJson {
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    digits: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    named: Option<String>,
}

impl From<&TimePoint> for TimeJson {
    fn from(t: &TimePoint) -> Self {
        let (exact, digits) = match t.tag() {
            TimeTag::Float => (None, None),
            TimeTag::Rational { num, den } => (Some([num, den]), None),
            TimeTag::Irrational { .. } => (None, Some(t.tag().to_string())),
        };
        Self { value: t.value(), exact, digits, named: None }
    }
}

impl TryFrom<TimeJson> for TimePoint {
    type Error = Error;

    fn try_from(j: TimeJson) -> Result<Self> {
        if let Some([p, q]) = j.exact {
            return TimePoint::rational(p, q);
        }
        if let Some(name) = j.named {
            return TimePoint::named(&name);
        }
        if let Some(d) = j.digits {
            return TimePoint::from_digits(&d);
        }
        TimePoint::from_f64(j.value)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    coeff: Vec<CoeffTerm>,
    l1: u32,
    l: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpecJson {
    taus: Vec<TimeJson>,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<TimeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
}

impl From<&IntegrandSpec> for SpecJson {
    fn from(s: &IntegrandSpec) -> Self {
        Self {
            taus: s.taus.iter().map(TimeJson::from).collect(),
            terms: s.terms.iter().map(|t| TermJson { coeff: t.coeff.terms().to_vec(), l1: t.l1, l: t.l.clone() }).collect(),
            horizon: (s.horizon.value() != 1.0).then(|| TimeJson::from(&s.horizon)),
            tail_bound: (s.tail_bound != 0.0).then_some(s.tail_bound),
        }
    }
}

impl TryFrom<SpecJson> for IntegrandSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        let taus = j.taus.into_iter().map(TimePoint::try_from).collect::<Result<Vec<_>>>()?;
        let terms = j.terms.into_iter().map(|t| IntegrandTerm { coeff: CoeffFn::new(t.coeff), l1: t.l1, l: t.l }).collect();
        let mut spec = IntegrandSpec::new(taus, terms)?;
        if let Some(h) = j.horizon {
            spec = spec.with_horizon(h.try_into()?)?;
        }
        Ok(spec.with_tail_bound(j.tail_bound.unwrap_or(0.0)))
    }
}
