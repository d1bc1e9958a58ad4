//! Jointly Gaussian samples of factors and pathwise Wick monomials.
//!
//! Normal variates come from ChaCha8 seeded with the 64-bit seed: sample i,
//! column j uses the (i k + j)-th 64-bit output, mapped to a uniform in
//! (0, 1) as (x >> 11 + 1/2) 2^-53 and then through the inverse normal CDF.
//! Any range of samples can be produced independently, so results do not
//! depend on the thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chaos::WickMonomial;
use crate::error::{Error, Result};
use crate::gauss_kernel::{cov, hermite, Factor};

/// Negative eigenvalues of the Gram matrix above this size are an error;
/// smaller ones are clipped to zero.
pub const PSD_SLACK: f64 = 1e-8;

const CHUNK: usize = 1 << 14;

/// Inverse-CDF transform of a raw 64-bit word.
pub fn standard_normal(word: u64) -> f64 {
    let u = ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(u)
}

/// Generator of jointly Gaussian rows for a fixed list of factors.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub factors: Vec<Factor>,
    pub gram: Vec<f64>,
    /// Row-major symmetric square root of the Gram matrix.
    root: Vec<f64>,
    pub seed: u64,
    /// Negative eigenvalues were clipped.
    pub regularized: bool,
}

impl Sampler {
    pub fn new(factors: &[Factor], seed: u64) -> Result<Self> {
        let k = factors.len();
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let c = cov(&factors[i], &factors[j])?;
                gram[i * k + j] = c;
                gram[j * k + i] = c;
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(k, k, &gram));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_SLACK {
            return Err(Error::NonPsd(min));
        }
        let regularized = min < 0.0;
        let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let root = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| root[(i, j)]).collect();
        Ok(Self { factors: factors.to_vec(), gram, root, seed, regularized })
    }

    pub fn width(&self) -> usize {
        self.factors.len()
    }

    /// Rows `start..start + count`, row-major.
    pub fn rows(&self, start: usize, count: usize) -> Vec<f64> {
        let k = self.width();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // two 32-bit words per draw
        rng.set_word_pos(2 * (start * k) as u128);
        let mut z = vec![0.0; k];
        let mut out = Vec::with_capacity(count * k);
        for _ in 0..count {
            for zj in z.iter_mut() {
                *zj = standard_normal(rng.next_u64());
            }
            for i in 0..k {
                out.push((0..k).map(|j| self.root[i * k + j] * z[j]).sum());
            }
        }
        out
    }

    /// Fold `f` over rows in fixed-size chunks, in parallel, combining the
    /// per-chunk results in index order.
    pub fn fold_chunks<T: Send>(&self, count: usize, f: impl Fn(&[f64], usize) -> T + Sync) -> Vec<T> {
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let len = CHUNK.min(count - start);
                f(&self.rows(start, len), len)
            })
            .collect()
    }
}

/// Samples of jointly Gaussian factors, one row per sample.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub factors: Vec<Factor>,
    /// Row-major, `count * factors.len()`.
    pub values: Vec<f64>,
    pub gram: Vec<f64>,
    pub regularized: bool,
}

impl SampleBatch {
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let k = self.factors.len();
        (0..self.count).map(move |i| self.values[i * k + j])
    }
}

pub fn sample_factors(factors: &[Factor], count: usize, seed: u64) -> Result<SampleBatch> {
    let s = Sampler::new(factors, seed)?;
    let values = s.fold_chunks(count, |rows, _| rows.to_vec()).concat();
    Ok(SampleBatch { seed, count, factors: s.factors, values, gram: s.gram, regularized: s.regularized })
}

/// Evaluation plan for one Wick monomial over a row of factor samples.
///
/// States are exponent vectors e <= target. Removing one copy of the first
/// factor X with a nonzero exponent,
/// X ⋄ M = X M - Σ_j cov(X, Y_j) e_j M / Y_j,
/// and a single factor is a Hermite polynomial in its own variance.
#[derive(Debug, Clone)]
pub struct WickProgram {
    coeff: f64,
    columns: Vec<usize>,
    steps: Vec<Step>,
}

#[derive(Debug, Clone)]
enum Step {
    One,
    Hermite { slot: usize, power: u32, var: f64 },
    Recur { slot: usize, prev: usize, terms: Vec<(f64, usize)> },
}

impl WickProgram {
    pub fn compile(m: &WickMonomial, factors: &[Factor], gram: &[f64]) -> Result<Self> {
        let k = factors.len();
        let columns: Vec<usize> = m.factors().iter().map(|(f, _)| factors.iter().position(|g| g == f).ok_or(Error::MissingFactor)).collect::<Result<_>>()?;
        let target: Vec<u32> = m.factors().iter().map(|(_, l)| *l).collect();
        let r = target.len();
        let c = |a: usize, b: usize| gram[columns[a] * k + columns[b]];
        // mixed-radix index of exponent vectors
        let radix: Vec<usize> = target.iter().map(|&l| l as usize + 1).collect();
        let total: usize = radix.iter().product();
        let decode = |mut idx: usize| -> Vec<u32> {
            radix
                .iter()
                .map(|&b| {
                    let d = idx % b;
                    idx /= b;
                    d as u32
                })
                .collect()
        };
        let encode = |e: &[u32]| -> usize { e.iter().zip(&radix).rev().fold(0, |acc, (&d, &b)| acc * b + d as usize) };
        // every predecessor of a state has a smaller index, so index order is a valid evaluation order
        let steps = (0..total)
            .map(|idx| {
                let e = decode(idx);
                let nonzero: Vec<usize> = (0..r).filter(|&i| e[i] > 0).collect();
                match nonzero.as_slice() {
                    [] => Step::One,
                    [i] => Step::Hermite { slot: *i, power: e[*i], var: c(*i, *i) },
                    _ => {
                        let i = nonzero[0];
                        let mut rest = e.clone();
                        rest[i] -= 1;
                        let prev = encode(&rest);
                        let terms = (0..r)
                            .filter(|&j| rest[j] > 0 && c(i, j) != 0.0)
                            .map(|j| {
                                let mut down = rest.clone();
                                down[j] -= 1;
                                (c(i, j) * rest[j] as f64, encode(&down))
                            })
                            .collect();
                        Step::Recur { slot: i, prev, terms }
                    }
                }
            })
            .collect();
        Ok(Self { coeff: m.coeff(), columns, steps })
    }

    /// Value on one sample row; `scratch` is reused between calls.
    pub fn eval(&self, row: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        for step in &self.steps {
            let v = match step {
                Step::One => 1.0,
                Step::Hermite { slot, power, var } => hermite(*power, *var, row[self.columns[*slot]]),
                Step::Recur { slot, prev, terms } => {
                    let mut v = row[self.columns[*slot]] * scratch[*prev];
                    for &(w, j) in terms {
                        v -= w * scratch[j];
                    }
                    v
                }
            };
            scratch.push(v);
        }
        self.coeff * scratch.last().copied().unwrap_or(1.0)
    }
}

/// Pathwise values of `m` on every row of `batch`.
pub fn evaluate_monomial(m: &WickMonomial, batch: &SampleBatch) -> Result<Vec<f64>> {
    let prog = WickProgram::compile(m, &batch.factors, &batch.gram)?;
    let k = batch.factors.len();
    let mut scratch = Vec::new();
    Ok((0..batch.count).map(|i| prog.eval(&batch.values[i * k..(i + 1) * k], &mut scratch)).collect())
}
