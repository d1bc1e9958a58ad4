//! Time points in [0, 1] with optional exactness tags.
//!
//! The grid location of a time matters to the covariance kernel only through
//! the fractional part {n t}. Tagged times get it exactly: rationals through
//! integer arithmetic, irrationals through a 30-digit fixed-point expansion.
//! Untagged times use the exact binary value of the `f64`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::gcd;

/// Fixed-point digits kept for irrational times.
pub const FIXED_DIGITS: u32 = 30;
const FIXED_ONE: u128 = 10u128.pow(FIXED_DIGITS);

/// Distance to a node below which an untagged time is rejected.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeTag {
    Float,
    Rational {
        num: u64,
        den: u64,
    },
    /// `digits / 10^30`, truncated.
    Irrational {
        digits: u128,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct TimePoint {
    value: f64,
    tag: TimeTag,
}

/// Constants available by name in integrand files and on the command line.
pub const NAMED_CONSTANTS: &[(&str, &str)] = &[
    ("inv_pi", "0.3183098861837906715377675267450287240689"),
    ("inv_sqrt2", "0.7071067811865475244008443621048490392848"),
    ("inv_e", "0.3678794411714423215955237701614608674458"),
    ("sqrt2_minus_1", "0.4142135623730950488016887242096980785697"),
];

/// Exact location of `n t` relative to the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fractional {
    pub floor: u64,
    pub frac: f64,
    pub on_node: bool,
}

impl TimePoint {
    pub const ZERO: TimePoint = TimePoint { value: 0.0, tag: TimeTag::Rational { num: 0, den: 1 } };
    pub const ONE: TimePoint = TimePoint { value: 1.0, tag: TimeTag::Rational { num: 1, den: 1 } };

    /// Untagged time. The endpoints 0 and 1 are tagged automatically.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::TimeOutOfRange(value));
        }
        if value == 0.0 {
            return Ok(Self::ZERO);
        }
        if value == 1.0 {
            return Ok(Self::ONE);
        }
        Ok(Self { value, tag: TimeTag::Float })
    }

    pub fn rational(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::TimeOutOfRange(num as f64 / den as f64));
        }
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        Ok(Self { value: num as f64 / den as f64, tag: TimeTag::Rational { num, den } })
    }

    /// Parse a decimal expansion such as `"0.31830988..."` into an irrational tag.
    pub fn from_digits(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad digit string {s:?}"));
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if !(int.is_empty() || int == "0") || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut digits: u128 = 0;
        for (i, b) in frac.bytes().take(FIXED_DIGITS as usize).enumerate() {
            digits += (b - b'0') as u128 * 10u128.pow(FIXED_DIGITS - 1 - i as u32);
        }
        Ok(Self::from_fixed(digits))
    }

    fn from_fixed(digits: u128) -> Self {
        let value = digits as f64 / FIXED_ONE as f64;
        Self { value, tag: TimeTag::Irrational { digits } }
    }

    pub fn named(name: &str) -> Result<Self> {
        NAMED_CONSTANTS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, d)| Self::from_digits(d))
            .unwrap_or_else(|| Err(Error::InvalidSpec(format!("unknown constant {name:?}"))))
    }

    pub fn inv_pi() -> Self {
        Self::named("inv_pi").expect("builtin constant")
    }

    pub fn inv_sqrt2() -> Self {
        Self::named("inv_sqrt2").expect("builtin constant")
    }

    /// Parse `p/q`, a named constant, `0.xxx` with more than 17 digits (irrational
    /// tag), or a plain decimal (untagged).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse().map_err(|_| Error::InvalidSpec(format!("bad rational {s:?}")))?;
            let q = q.trim().parse().map_err(|_| Error::InvalidSpec(format!("bad rational {s:?}")))?;
            return Self::rational(p, q);
        }
        if NAMED_CONSTANTS.iter().any(|(n, _)| *n == s) {
            return Self::named(s);
        }
        if s.split_once('.').is_some_and(|(_, f)| f.len() > 17) {
            return Self::from_digits(s);
        }
        let v: f64 = s.parse().map_err(|_| Error::InvalidSpec(format!("bad time {s:?}")))?;
        Self::from_f64(v)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn tag(&self) -> TimeTag {
        self.tag
    }

    pub fn is_exact_rational(&self) -> bool {
        matches!(self.tag, TimeTag::Rational { .. })
    }

    pub fn is_irrational(&self) -> bool {
        matches!(self.tag, TimeTag::Irrational { .. })
    }

    /// {k t} as a new time point, keeping the tag exact where possible.
    pub fn frac_multiple(&self, k: u64) -> Result<Self> {
        match self.tag {
            TimeTag::Rational { num, den } => {
                let r = (num as u128 * k as u128 % den as u128) as u64;
                Self::rational(r, den)
            }
            TimeTag::Irrational { digits } => {
                let x = digits.checked_mul(k as u128).ok_or_else(|| Error::Config("multiple too large".into()))?;
                Ok(Self::from_fixed(x % FIXED_ONE))
            }
            TimeTag::Float => {
                let x = self.value * k as f64;
                Self::from_f64(x - x.floor())
            }
        }
    }

    /// Location of `n t` with respect to the integers.
    ///
    /// Untagged times closer than [`BOUNDARY_EPS`] to a multiple of `1/n`
    /// are rejected rather than guessed.
    pub fn fractional(&self, n: u64) -> Result<Fractional> {
        let f = match self.tag {
            TimeTag::Rational { num, den } => {
                let x = num as u128 * n as u128;
                let (fl, rem) = (x / den as u128, x % den as u128);
                Fractional { floor: fl as u64, frac: rem as f64 / den as f64, on_node: rem == 0 }
            }
            TimeTag::Irrational { digits } => match digits.checked_mul(n as u128) {
                Some(x) => {
                    let (fl, rem) = (x / FIXED_ONE, x % FIXED_ONE);
                    Fractional { floor: fl as u64, frac: rem as f64 / FIXED_ONE as f64, on_node: rem == 0 }
                }
                None => return Err(Error::Config(format!("n = {n} too large for fixed-point time"))),
            },
            TimeTag::Float => {
                let f = float_fractional(self.value, n);
                if f.frac.min(1.0 - f.frac) < BOUNDARY_EPS {
                    return Err(Error::BoundaryAmbiguity { t: self.value, n });
                }
                f
            }
        };
        Ok(f)
    }

    /// Exact equality of the underlying reals where tags allow it.
    pub fn same_point(&self, other: &TimePoint) -> bool {
        match (self.tag, other.tag) {
            (TimeTag::Rational { num: a, den: b }, TimeTag::Rational { num: c, den: d }) => a as u128 * d as u128 == c as u128 * b as u128,
            (TimeTag::Irrational { digits: a }, TimeTag::Irrational { digits: b }) => a == b,
            _ => self.value == other.value,
        }
    }
}

fn float_fractional(value: f64, n: u64) -> Fractional {
    if value == 0.0 {
        return Fractional { floor: 0, frac: 0.0, on_node: true };
    }
    // value = m * 2^-k exactly
    let bits = value.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (m, k) = if exp == 0 { (bits & ((1 << 52) - 1), 1074) } else { ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp) };
    if k <= 0 {
        let x = (m as u128) << (-k) as u32;
        return Fractional { floor: (x * n as u128) as u64, frac: 0.0, on_node: true };
    }
    let x = m as u128 * n as u128;
    if k >= 120 {
        let v = value * n as f64;
        return Fractional { floor: 0, frac: v, on_node: false };
    }
    let k = k as u32;
    let fl = x >> k;
    let rem = x & ((1u128 << k) - 1);
    Fractional { floor: fl as u64, frac: rem as f64 / (1u128 << k) as f64, on_node: rem == 0 }
}

impl PartialEq for TimePoint {
    fn eq(&self, other: &Self) -> bool {
        self.value.total_cmp(&other.value) == Ordering::Equal
    }
}

impl Eq for TimePoint {}

impl PartialOrd for TimePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value)
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            TimeTag::Rational { num, den } => write!(f, "{num}/{den}"),
            _ => write!(f, "{}", self.value),
        }
    }
}

impl fmt::Display for TimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeTag::Float => write!(f, "float"),
            TimeTag::Rational { num, den } => write!(f, "{num}/{den}"),
            TimeTag::Irrational { digits } => write!(f, "0.{digits:030}"),
        }
    }
}
