//! Monte Carlo test that Y - E[Y | grid] is orthogonal to polynomials in
//! the node values.

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use super::sampling::{Sampler, WickProgram};
use crate::chaos::{ChaosExpansion, WickMonomial};
use crate::error::{Error, Result};
use crate::gauss_kernel::{Factor, NodeSet, TimePoint};
use crate::numeric::CompensatedSum;
use crate::skorohod::{skorohod_integral, IntegrandSpec};

/// Π_i W_{t_i}^{p_i} over grid nodes t_1 < t_2 < ... (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFn {
    pub powers: Vec<(usize, u32)>,
}

impl TestFn {
    pub fn new(powers: Vec<(usize, u32)>) -> Self {
        Self { powers }
    }

    pub fn constant() -> Self {
        Self { powers: Vec::new() }
    }

    pub fn node(i: usize, p: u32) -> Self {
        Self { powers: vec![(i, p)] }
    }

    pub fn label(&self) -> String {
        if self.powers.is_empty() {
            return "1".into();
        }
        self.powers.iter().map(|(i, p)| if *p == 1 { format!("W[{i}]") } else { format!("W[{i}]^{p}") }).collect::<Vec<_>>().join("*")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionCheck {
    pub test_fn: String,
    pub mean: f64,
    pub std_err: f64,
    /// mean / std_err
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub count: usize,
    pub seed: u64,
    pub checks: Vec<ProjectionCheck>,
    /// Every |z| is at most [`Z_BAND`].
    pub passed: bool,
}

/// Acceptance band in standard errors.
pub const Z_BAND: f64 = 4.0;

/// Y - E[Y | grid] with each time integral replaced by a Gauss-Legendre sum
/// of `order` points per panel. Conditioning commutes with the sum, so the
/// discretised residual is still exactly orthogonal to the grid values.
pub fn residual_expansion(u: &IntegrandSpec, grid: &NodeSet, order: usize) -> Result<ChaosExpansion> {
    let y = skorohod_integral(u)?;
    let d = y.condition_residual(grid)?;
    let h = y.horizon.value();
    let mut cuts: Vec<f64> = grid.nodes().iter().map(|t| t.value()).chain(u.taus.iter().map(|t| t.value())).filter(|&t| t > 0.0 && t < h).collect();
    cuts.extend([0.0, h]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let gl = GaussLegendre::new(order.max(2)).map_err(|e| Error::Config(e.to_string()))?;
    let mut monos: Vec<WickMonomial> = d.boundary.terms().to_vec();
    for term in &d.time_terms {
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &(x, wx) in gl.as_node_weight_pairs() {
                let s = a + 0.5 * (b - a) * (x + 1.0);
                let running = Factor::of_kind(term.running, TimePoint::from_f64(s)?, term.grid.as_ref())?;
                let weight = -0.5 * (b - a) * wx * term.g.eval(s);
                monos.push(WickMonomial::new(weight, term.fixed.factors().iter().cloned().chain([(running, term.power)])));
            }
        }
    }
    Ok(ChaosExpansion::new(monos))
}

pub fn projection_check(u: &IntegrandSpec, grid: &NodeSet, test_fns: &[TestFn], count: usize, seed: u64) -> Result<ProjectionReport> {
    let d = residual_expansion(u, grid, 4)?;
    let nodes = grid.nodes();
    let mut factors: Vec<Factor> = Vec::new();
    let mut add = |f: &Factor| -> usize {
        if let Some(i) = factors.iter().position(|g| g == f) {
            return i;
        }
        factors.push(f.clone());
        factors.len() - 1
    };
    for m in d.terms() {
        for (f, _) in m.factors() {
            add(f);
        }
    }
    let mut phis: Vec<Vec<(usize, u32)>> = Vec::new();
    for tf in test_fns {
        let mut cols = Vec::new();
        for &(i, p) in &tf.powers {
            let t = *nodes.get(i.wrapping_sub(1)).ok_or_else(|| Error::Config(format!("node index {i} out of range")))?;
            cols.push((add(&Factor::path(t)), p));
        }
        phis.push(cols);
    }
    let sampler = Sampler::new(&factors, seed)?;
    let progs: Vec<WickProgram> = d.terms().iter().map(|m| WickProgram::compile(m, &factors, &sampler.gram)).collect::<Result<_>>()?;
    let k = factors.len();
    let nt = test_fns.len();
    let partial = sampler.fold_chunks(count, |rows, len| {
        let mut sums = vec![(CompensatedSum::new(), CompensatedSum::new()); nt];
        let mut scratch = Vec::new();
        for r in 0..len {
            let row = &rows[r * k..(r + 1) * k];
            let dv: f64 = progs.iter().map(|p| p.eval(row, &mut scratch)).sum();
            for (j, cols) in phis.iter().enumerate() {
                let phi: f64 = cols.iter().map(|&(c, p)| row[c].powi(p as i32)).product();
                let x = dv * phi;
                sums[j].0.add(x);
                sums[j].1.add(x * x);
            }
        }
        sums.into_iter().map(|(a, b)| (a.value(), b.value())).collect::<Vec<_>>()
    });
    let n = count as f64;
    let checks: Vec<ProjectionCheck> = (0..nt)
        .map(|j| {
            let s1: CompensatedSum = partial.iter().map(|p| p[j].0).collect();
            let s2: CompensatedSum = partial.iter().map(|p| p[j].1).collect();
            let mean = s1.value() / n;
            let var = (s2.value() / n - mean * mean).max(0.0) * n / (n - 1.0);
            let std_err = (var / n).sqrt();
            let z = if std_err > 0.0 {
                mean / std_err
            } else if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ProjectionCheck { test_fn: test_fns[j].label(), mean, std_err, z }
        })
        .collect();
    let passed = count > 1 && checks.iter().all(|c| c.z.abs() <= Z_BAND);
    Ok(ProjectionReport { count, seed, checks, passed })
}
