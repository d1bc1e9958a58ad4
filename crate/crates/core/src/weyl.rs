//! Grid sizes adapted to a fixed time, and empirical convergence rates.
//!
//! For irrational t the worst case for interpolation is {n t} close to 1/2,
//! where var(B_t) = ({nt}/n)(1 - {nt}) is as large as 1/(4n) allows. Records
//! of |{nt} - 1/2| are found by an exact integer scan. For rational t = p/q
//! the multiples of q put t on a node, where the bridge vanishes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss_kernel::{TimePoint, TimeTag, FIXED_DIGITS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylSequence {
    pub t: f64,
    pub indices: Vec<u64>,
    /// {n t} per index
    pub fracs: Vec<f64>,
    /// |{n t} - 1/2| per index, strictly decreasing
    pub gaps: Vec<f64>,
}

impl WeylSequence {
    /// 4 n var(B_t) = 4 {nt} (1 - {nt}) at each index.
    pub fn bridge_ratios(&self) -> Vec<f64> {
        self.fracs.iter().map(|f| 4.0 * f * (1.0 - f)).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// t = numer / modulus exactly, with the modulus small enough for u128
/// arithmetic on 2 numer.
fn exact_fraction(t: &TimePoint) -> Result<(u128, u128)> {
    match t.tag() {
        TimeTag::Irrational { digits } => Ok((digits, 10u128.pow(FIXED_DIGITS))),
        TimeTag::Rational { .. } => Err(Error::Config("equidistribution needs an irrational time".into())),
        TimeTag::Float => {
            log::warn!("scanning an untagged time {}; tag it as irrational for exact results", t.value());
            let v = t.value();
            for k in 0..=120 {
                let scaled = v * 2f64.powi(k);
                if scaled.fract() == 0.0 {
                    return Ok((scaled as u128, 1u128 << k));
                }
            }
            Err(Error::Config(format!("time {v} has too many binary digits for an exact scan")))
        }
    }
}

/// Every record of |{n t} - 1/2| over 1 <= n <= n_max.
pub fn weyl_records(t: TimePoint, n_max: u64) -> Result<WeylSequence> {
    let (numer, modulus) = exact_fraction(&t)?;
    let numer = numer % modulus;
    let mut r = 0u128;
    let mut best = u128::MAX;
    let mut records: Vec<(u64, u128)> = Vec::new();
    for n in 1..=n_max {
        r += numer;
        if r >= modulus {
            r -= modulus;
        }
        // |{nt} - 1/2| scaled by 2 modulus
        let d = (2 * r).abs_diff(modulus);
        if d < best {
            best = d;
            records.push((n, r));
        }
    }
    let m = modulus as f64;
    Ok(WeylSequence {
        t: t.value(),
        indices: records.iter().map(|&(n, _)| n).collect(),
        fracs: records.iter().map(|&(_, r)| r as f64 / m).collect(),
        gaps: records.iter().map(|&(_, r)| (2 * r).abs_diff(modulus) as f64 / (2.0 * m)).collect(),
    })
}

/// The last `count` records of |{n t} - 1/2| over 1 <= n <= n_max.
pub fn weyl_sequence(t: TimePoint, count: usize, n_max: u64) -> Result<WeylSequence> {
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    let mut all = weyl_records(t, n_max)?;
    let found = all.len();
    if found < count {
        return Err(Error::InsufficientRange { found, wanted: count });
    }
    let skip = found - count;
    all.indices.drain(..skip);
    all.fracs.drain(..skip);
    all.gaps.drain(..skip);
    Ok(all)
}

/// Denominators q <= n_max of continued-fraction convergents p/q of 2t with
/// p odd. These are best approximations, so each is a record of the scan.
pub fn convergent_seeds(t: TimePoint, n_max: u64) -> Result<Vec<u64>> {
    let (numer, modulus) = exact_fraction(&t)?;
    let (mut a, mut b) = (2 * numer, modulus);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut out = Vec::new();
    while b != 0 {
        let k = a / b;
        (a, b) = (b, a - k * b);
        let (p, q) = (k * p1 + p0, k * q1 + q0);
        if q > n_max as u128 {
            break;
        }
        if p % 2 == 1 && q > 0 {
            out.push(q as u64);
        }
        (p0, q0, p1, q1) = (p1, q1, p, q);
    }
    Ok(out)
}

/// q, 2q, ..., count q for t = p/q in lowest terms.
pub fn rational_indices(t: TimePoint, count: usize) -> Result<Vec<u64>> {
    match t.tag() {
        TimeTag::Rational { den, .. } => Ok((1..=count as u64).map(|k| k * den).collect()),
        _ => Err(Error::NoExactTag),
    }
}

/// Least-squares fit of log e = log c + alpha log n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub alpha: f64,
    pub c: f64,
    pub r2: f64,
    /// Smallest and largest n used.
    pub window: (u64, u64),
    pub points: usize,
}

/// Fraction of the smallest indices left out of [`fit_rate`].
pub const DEFAULT_DROP: f64 = 0.2;

/// Rate fit after dropping the smallest 20% of indices.
pub fn fit_rate(points: &[(u64, f64)]) -> Result<RateFit> {
    fit_rate_dropping(points, DEFAULT_DROP)
}

pub fn fit_rate_dropping(points: &[(u64, f64)], drop: f64) -> Result<RateFit> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[0].0 == w[1].0) || pts.iter().any(|p| p.1.is_nan() || p.1 <= 0.0 || p.0 == 0) {
        return Err(Error::DegeneratePoints);
    }
    let skip = (pts.len() as f64 * drop.clamp(0.0, 1.0)).floor() as usize;
    let pts = &pts[skip..];
    if pts.len() < 3 {
        return Err(Error::DegeneratePoints);
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit { alpha, c: intercept.exp(), r2, window: (pts[0].0, pts[pts.len() - 1].0), points: pts.len() })
}
