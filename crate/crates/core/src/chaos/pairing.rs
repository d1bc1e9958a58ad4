//! Sum over perfect matchings between two multisets of Gaussians.
//!
//! For rows with multiplicities l_i and columns with multiplicities m_j this is
//! prod l_i! prod m_j! sum_A prod C_ij^A_ij / A_ij!, the sum running over
//! nonnegative integer matrices A with row sums l and column sums m.

use smallvec::SmallVec;

use crate::numeric::factorial;

/// `c` is row-major with `rows.len()` rows and `cols.len()` columns.
pub fn pairing_sum(c: &[f64], rows: &[u32], cols: &[u32]) -> f64 {
    let (r, k) = (rows.len(), cols.len());
    debug_assert_eq!(c.len(), r * k);
    let total: u32 = rows.iter().sum();
    if total != cols.iter().sum::<u32>() {
        return 0.0;
    }
    if total == 0 {
        return 1.0;
    }
    if r == 1 {
        return factorial(total) * cols.iter().zip(c).map(|(&m, &x)| x.powi(m as i32)).product::<f64>();
    }
    if k == 1 {
        return factorial(total) * rows.iter().zip(c).map(|(&l, &x)| x.powi(l as i32)).product::<f64>();
    }
    if r == 2 && k == 2 {
        return two_by_two(c, rows, cols);
    }
    let mut cap: SmallVec<[u32; 8]> = SmallVec::from_slice(cols);
    let col_fact: f64 = cols.iter().map(|&m| factorial(m)).product();
    let mut search = Search { c, rows, k, cap: &mut cap };
    col_fact * search.row(0, 1.0)
}

fn two_by_two(c: &[f64], rows: &[u32], cols: &[u32]) -> f64 {
    let (l1, l2, m1, m2) = (rows[0], rows[1], cols[0], cols[1]);
    let lo = l1.saturating_sub(m2);
    let hi = l1.min(m1);
    let mut acc = 0.0;
    for x in lo..=hi {
        let a = [x, l1 - x, m1 - x, l2 + x - m1];
        let mut term = binom(l1, x) * binom(l2, m1 - x);
        for (&ci, &ai) in c.iter().zip(&a) {
            if ai > 0 {
                term *= ci.powi(ai as i32);
            }
        }
        acc += term;
    }
    acc * factorial(m1) * factorial(m2)
}

fn binom(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

struct Search<'a> {
    c: &'a [f64],
    rows: &'a [u32],
    k: usize,
    cap: &'a mut [u32],
}

impl Search<'_> {
    fn row(&mut self, i: usize, w: f64) -> f64 {
        if i == self.rows.len() {
            return if self.cap.iter().all(|&x| x == 0) { w } else { 0.0 };
        }
        let l = self.rows[i];
        if i + 1 == self.rows.len() {
            // last row is forced to take what is left
            let mut w = w * factorial(l);
            for j in 0..self.k {
                let a = self.cap[j];
                if a > 0 {
                    let x = self.c[i * self.k + j];
                    if x == 0.0 {
                        return 0.0;
                    }
                    w *= x.powi(a as i32) / factorial(a);
                }
            }
            return w;
        }
        self.col(i, 0, l, w * factorial(l))
    }

    fn col(&mut self, i: usize, j: usize, rem: u32, w: f64) -> f64 {
        let x = self.c[i * self.k + j];
        if j + 1 == self.k {
            if rem > self.cap[j] || (rem > 0 && x == 0.0) {
                return 0.0;
            }
            self.cap[j] -= rem;
            let out = self.row(i + 1, w * x.powi(rem as i32) / factorial(rem));
            self.cap[j] += rem;
            return out;
        }
        let hi = if x == 0.0 { 0 } else { rem.min(self.cap[j]) };
        let mut acc = 0.0;
        let mut xp = 1.0;
        for a in 0..=hi {
            self.cap[j] -= a;
            acc += self.col(i, j + 1, rem - a, w * xp / factorial(a));
            self.cap[j] += a;
            xp *= x;
        }
        acc
    }
}
