//! Small numerical helpers shared across modules.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

const FACT_LEN: usize = 171;

static FACTORIALS: std::sync::OnceLock<[f64; FACT_LEN]> = std::sync::OnceLock::new();

fn table() -> &'static [f64; FACT_LEN] {
    FACTORIALS.get_or_init(|| {
        let mut t = [1.0; FACT_LEN];
        for k in 1..FACT_LEN {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// k! as f64; finite for k <= 170.
pub fn factorial(k: u32) -> f64 {
    table().get(k as usize).copied().unwrap_or(f64::INFINITY)
}

pub const MAX_DEGREE: u32 = 170;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(xs), 4e-16);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 4e-16);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(10), 3_628_800.0);
        assert!(factorial(170).is_finite());
        assert!(factorial(171).is_infinite());
    }
}
