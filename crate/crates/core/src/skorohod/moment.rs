//! E[Y^2] for a Skorohod result Y = b - ∫ A(s) ds.
//!
//! E[Y^2] = E[b^2] - 2 ∫ E[b A(s)] ds + ∫∫ Φ(s, u) ds du with
//! Φ(s, u) = E[A(s) A(u)]. The kernel of running factors against each other
//! depends on the grid only when s and u share a cell, so Φ is split into a
//! far-field part Φ_0 (bridge covariance between running factors set to zero)
//! that is smooth away from the diagonal and a per-cell correction Φ - Φ_0.
//! Φ_0 is integrated on coarse panels cut at every fixed time and the cells
//! holding them; the correction is integrated cell by cell.

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::coeff::CoeffFn;
use super::integral::SkorohodResult;
use crate::chaos::pairing_sum;
use crate::error::{Error, Result};
use crate::gauss_kernel::{bridge_cov, kernel, Cell, Factor, FactorKind, NodeSet};
use crate::numeric::{CompensatedSum, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre order on coarse panels; checked against twice this.
    pub order: usize,
    /// Starting order inside a grid cell, doubled until two orders agree.
    pub local_order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panel bisections.
    pub max_level: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 8, local_order: 3, rel_tol: 1e-9, abs_tol: 1e-15, max_level: 8 }
    }
}

/// The three pieces of E[Y^2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentParts {
    /// E[b^2]
    pub boundary: f64,
    /// ∫ E[b A(s)] ds
    pub cross: f64,
    /// ∫∫ E[A(s) A(u)] ds du
    pub double: f64,
}

impl MomentParts {
    pub fn total(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.boundary);
        acc.add(-2.0 * self.cross);
        acc.add(self.double);
        acc.value()
    }
}

pub fn second_moment(y: &SkorohodResult, quad: &QuadratureConfig) -> Result<f64> {
    Ok(second_moment_parts(y, quad)?.total())
}

pub fn second_moment_parts(y: &SkorohodResult, quad: &QuadratureConfig) -> Result<MomentParts> {
    if quad.order < 2 || quad.local_order < 2 {
        return Err(Error::Config("quadrature orders must be at least 2".into()));
    }
    let model = Model::compile(y)?;
    let boundary = model.boundary_sq();
    if model.terms.is_empty() {
        return Ok(MomentParts { boundary, cross: 0.0, double: 0.0 });
    }
    let (lo, hi) = (Rule::new(quad.order), Rule::new(2 * quad.order));
    let mut level = 0;
    let (cross, far) = loop {
        let panels = model.panels(level);
        let (cross, far) = (model.cross(&panels, &lo), model.far_field(&panels, &lo));
        let (cross_f, far_f) = (model.cross(&panels, &hi), model.far_field(&panels, &hi));
        let coarse = MomentParts { boundary, cross, double: far }.total();
        let fine = MomentParts { boundary, cross: cross_f, double: far_f }.total();
        if (coarse - fine).abs() <= quad.rel_tol * fine.abs() + quad.abs_tol {
            break (cross_f, far_f);
        }
        if level >= quad.max_level {
            return Err(Error::QuadratureDivergence { coarse, fine });
        }
        level += 1;
    };
    let mut local = 0.0;
    if model.needs_local {
        // Φ - Φ_0 is a polynomial of degree <= d in each variable on every
        // sub-triangle, times smooth coefficients; small cells make the
        // high-degree part negligible, so start low and double. A few cells
        // of a coarse grid may need the smooth coefficients resolved too.
        let cap = (2 * (model.max_degree() as usize + 2)).max(quad.local_order).max(MAX_LOCAL_ORDER);
        let mut order = quad.local_order;
        let mut coarse = model.local_correction(&Rule::new(order));
        loop {
            let fine = model.local_correction(&Rule::new(2 * order));
            let total = MomentParts { boundary, cross, double: far + fine }.total();
            if (coarse - fine).abs() <= quad.rel_tol * total.abs() + quad.abs_tol {
                local = fine;
                break;
            }
            if 2 * order >= cap {
                return Err(Error::QuadratureDivergence { coarse: total - fine + coarse, fine: total });
            }
            order *= 2;
            coarse = fine;
        }
    }
    Ok(MomentParts { boundary, cross, double: far + local })
}

/// Highest cell order tried before giving up, unless the degree needs more.
const MAX_LOCAL_ORDER: usize = 96;

/// Gauss-Legendre rule on [0, 1].
struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new(order: usize) -> Self {
        let gl = GaussLegendre::new(order).expect("order >= 2");
        let (x, w) = gl.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).unzip();
        Self { x, w }
    }
}

#[derive(Debug, Clone, Copy)]
struct Fixed {
    kind: FactorKind,
    t: f64,
    cell: Option<Cell>,
}

type Slots = SmallVec<[(usize, u32); 4]>;

struct Term {
    g: CoeffFn,
    kind: FactorKind,
    power: u32,
    degree: u32,
    fixed: Slots,
}

struct Mono {
    coeff: f64,
    degree: u32,
    fixed: Slots,
}

/// Data at one running time s.
struct Point {
    t: f64,
    cell: Option<Cell>,
    /// g_j(s) per term
    g: Vec<f64>,
    /// cov(R_s, fixed f) per running kind, `KINDS * nf` entries
    cf: Vec<f64>,
}

const KINDS: usize = 3;

fn kind_index(k: FactorKind) -> usize {
    match k {
        FactorKind::Path => 0,
        FactorKind::Interp => 1,
        FactorKind::Bridge => 2,
    }
}

struct Model {
    grid: Option<NodeSet>,
    horizon: f64,
    fixed: Vec<Fixed>,
    ff: Vec<f64>,
    terms: Vec<Term>,
    boundary: Vec<Mono>,
    /// term indices grouped by degree
    by_degree: Vec<Vec<usize>>,
    breakpoints: Vec<f64>,
    needs_local: bool,
}

impl Model {
    fn compile(y: &SkorohodResult) -> Result<Self> {
        if y.max_degree() > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(y.max_degree()));
        }
        let mut grid: Option<NodeSet> = None;
        let mut note_grid = |g: Option<&NodeSet>| -> Result<()> {
            match (g, &grid) {
                (Some(g), Some(h)) if g != h => Err(Error::MixedNodeSets),
                (Some(g), None) => {
                    grid = Some(g.clone());
                    Ok(())
                }
                _ => Ok(()),
            }
        };
        for m in y.boundary.terms() {
            for (f, _) in m.factors() {
                note_grid(f.grid())?;
            }
        }
        for t in &y.time_terms {
            note_grid(t.grid.as_ref())?;
            for (f, _) in t.fixed.factors() {
                note_grid(f.grid())?;
            }
        }

        let mut table: Vec<Factor> = Vec::new();
        let mut slot = |f: &Factor| -> usize {
            if let Some(i) = table.iter().position(|g| g == f) {
                return i;
            }
            table.push(f.clone());
            table.len() - 1
        };
        let boundary: Vec<Mono> = y
            .boundary
            .terms()
            .iter()
            .map(|m| Mono { coeff: m.coeff(), degree: m.degree(), fixed: m.factors().iter().map(|(f, l)| (slot(f), *l)).collect() })
            .collect();
        let terms: Vec<Term> = y
            .time_terms
            .iter()
            .map(|t| Term {
                g: t.g.clone(),
                kind: t.running,
                power: t.power,
                degree: t.degree(),
                fixed: t.fixed.factors().iter().map(|(f, l)| (slot(f), *l)).collect(),
            })
            .collect();

        let fixed: Vec<Fixed> = table
            .iter()
            .map(|f| {
                let cell = match &grid {
                    Some(g) => Some(f.cell_in(g)?),
                    None => None,
                };
                Ok(Fixed { kind: f.kind(), t: f.time().value(), cell })
            })
            .collect::<Result<_>>()?;
        let nf = fixed.len();
        let mut ff = vec![0.0; nf * nf];
        for i in 0..nf {
            for j in 0..nf {
                ff[i * nf + j] = fixed_cov(&fixed[i], &fixed[j]);
            }
        }

        let horizon = y.horizon.value();
        let mut breakpoints = vec![0.0, horizon];
        for f in &fixed {
            breakpoints.push(f.t);
            if let (Some(c), Some(_)) = (f.cell, &grid) {
                if !c.on_node() {
                    breakpoints.push(c.left);
                    breakpoints.push(c.left + c.width);
                }
            }
        }
        breakpoints.retain(|&b| (0.0..=horizon).contains(&b));
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();

        let max_deg = terms.iter().map(|t| t.degree).max().unwrap_or(0) as usize;
        let mut by_degree = vec![Vec::new(); max_deg + 1];
        for (j, t) in terms.iter().enumerate() {
            by_degree[t.degree as usize].push(j);
        }
        let needs_local = grid.is_some() && terms.iter().any(|t| t.kind != FactorKind::Path && t.power > 0);
        Ok(Self { grid, horizon, fixed, ff, terms, boundary, by_degree, breakpoints, needs_local })
    }

    fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree).max().unwrap_or(0)
    }

    fn point(&self, t: f64, cell: Option<Cell>) -> Point {
        let nf = self.fixed.len();
        let g = self.terms.iter().map(|term| term.g.eval(t)).collect();
        let mut cf = vec![0.0; KINDS * nf];
        for (k, kind) in [FactorKind::Path, FactorKind::Interp, FactorKind::Bridge].into_iter().enumerate() {
            for (i, f) in self.fixed.iter().enumerate() {
                let bb = match (cell, f.cell) {
                    (Some(a), Some(b)) => bridge_cov(&a, &b),
                    _ => 0.0,
                };
                cf[k * nf + i] = kernel(kind, t, f.kind, f.t, bb);
            }
        }
        Point { t, cell, g, cf }
    }

    fn point_at(&self, t: f64) -> Point {
        let cell = self.grid.as_ref().map(|g| g.locate_value(t));
        self.point(t, cell)
    }

    fn boundary_sq(&self) -> f64 {
        let nf = self.fixed.len();
        let mut acc = CompensatedSum::new();
        let mut c: SmallVec<[f64; 16]> = SmallVec::new();
        for a in &self.boundary {
            for b in &self.boundary {
                if a.degree != b.degree {
                    continue;
                }
                c.clear();
                for &(i, _) in &a.fixed {
                    for &(j, _) in &b.fixed {
                        c.push(self.ff[i * nf + j]);
                    }
                }
                acc.add(a.coeff * b.coeff * pairing_sum(&c, &exps(&a.fixed), &exps(&b.fixed)));
            }
        }
        acc.value()
    }

    /// E[b A(s)]
    fn cross_at(&self, p: &Point) -> f64 {
        let nf = self.fixed.len();
        let mut acc = 0.0;
        let mut c: SmallVec<[f64; 25]> = SmallVec::new();
        for m in &self.boundary {
            let Some(js) = self.by_degree.get(m.degree as usize) else { continue };
            for &j in js {
                let t = &self.terms[j];
                let k = kind_index(t.kind) * nf;
                c.clear();
                for &(i, _) in &m.fixed {
                    c.push(p.cf[k + i]);
                    for &(f, _) in &t.fixed {
                        c.push(self.ff[i * nf + f]);
                    }
                }
                let mut cols: SmallVec<[u32; 5]> = SmallVec::new();
                cols.push(t.power);
                cols.extend(t.fixed.iter().map(|s| s.1));
                acc += m.coeff * p.g[j] * pairing_sum(&c, &exps(&m.fixed), &cols);
            }
        }
        acc
    }

    /// Φ(s, u) with running-running bridge covariance `bb`, and optionally
    /// the far-field value alongside.
    fn phi(&self, a: &Point, b: &Point, local: bool) -> (f64, f64) {
        let nf = self.fixed.len();
        let bb = if local {
            match (a.cell, b.cell) {
                (Some(x), Some(y)) => bridge_cov(&x, &y),
                _ => 0.0,
            }
        } else {
            0.0
        };
        let (mut exact, mut far) = (0.0, 0.0);
        let mut c: SmallVec<[f64; 25]> = SmallVec::new();
        let mut rows: SmallVec<[u32; 5]> = SmallVec::new();
        let mut cols: SmallVec<[u32; 5]> = SmallVec::new();
        for js in &self.by_degree {
            for &j in js {
                let tj = &self.terms[j];
                let gj = a.g[j];
                if gj == 0.0 {
                    continue;
                }
                let kj = kind_index(tj.kind) * nf;
                rows.clear();
                rows.push(tj.power);
                rows.extend(tj.fixed.iter().map(|s| s.1));
                for &k in js {
                    let tk = &self.terms[k];
                    let w = gj * b.g[k];
                    if w == 0.0 {
                        continue;
                    }
                    let kk = kind_index(tk.kind) * nf;
                    cols.clear();
                    cols.push(tk.power);
                    cols.extend(tk.fixed.iter().map(|s| s.1));
                    c.clear();
                    c.push(kernel(tj.kind, a.t, tk.kind, b.t, 0.0));
                    c.extend(tk.fixed.iter().map(|&(f, _)| a.cf[kj + f]));
                    for &(f, _) in &tj.fixed {
                        c.push(b.cf[kk + f]);
                        c.extend(tk.fixed.iter().map(|&(g, _)| self.ff[f * nf + g]));
                    }
                    let v0 = pairing_sum(&c, &rows, &cols);
                    far += w * v0;
                    if local {
                        c[0] = kernel(tj.kind, a.t, tk.kind, b.t, bb);
                        exact += w * (pairing_sum(&c, &rows, &cols) - v0);
                    }
                }
            }
        }
        (exact, far)
    }

    /// Coarse panels, each breakpoint interval bisected `level` times.
    fn panels(&self, level: u32) -> Vec<(f64, f64)> {
        let pieces = 1usize << level;
        let mut out = Vec::new();
        for w in self.breakpoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            for i in 0..pieces {
                let lo = a + (b - a) * i as f64 / pieces as f64;
                let hi = if i + 1 == pieces { b } else { a + (b - a) * (i + 1) as f64 / pieces as f64 };
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    fn cross(&self, panels: &[(f64, f64)], rule: &Rule) -> f64 {
        if self.boundary.is_empty() {
            return 0.0;
        }
        let mut acc = CompensatedSum::new();
        for &(a, b) in panels {
            for (x, w) in rule.x.iter().zip(&rule.w) {
                let p = self.point_at(a + (b - a) * x);
                acc.add(w * (b - a) * self.cross_at(&p));
            }
        }
        acc.value()
    }

    fn far_field(&self, panels: &[(f64, f64)], rule: &Rule) -> f64 {
        let pts: Vec<Vec<Point>> = panels.iter().map(|&(a, b)| rule.x.iter().map(|x| self.point_at(a + (b - a) * x)).collect()).collect();
        let per_panel: Vec<f64> = (0..panels.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = CompensatedSum::new();
                let (a, b) = panels[i];
                acc.add(2.0 * self.triangle(a, b, rule, |t| self.point_at(t), false));
                for j in i + 1..panels.len() {
                    let (c, d) = panels[j];
                    for (p, wp) in pts[i].iter().zip(&rule.w) {
                        for (q, wq) in pts[j].iter().zip(&rule.w) {
                            acc.add(2.0 * wp * wq * (b - a) * (d - c) * self.phi(p, q, false).1);
                        }
                    }
                }
                acc.value()
            })
            .collect();
        per_panel.into_iter().collect::<CompensatedSum>().value()
    }

    /// ∫∫ over {a <= u <= s <= b} in collapsed coordinates. Returns the far
    /// field, or the local difference Φ - Φ_0 when `local`.
    fn triangle(&self, a: f64, b: f64, rule: &Rule, at: impl Fn(f64) -> Point, local: bool) -> f64 {
        let mut acc = 0.0;
        for (x, wx) in rule.x.iter().zip(&rule.w) {
            let s = a + (b - a) * x;
            let p = at(s);
            let mut inner = 0.0;
            for (y, wy) in rule.x.iter().zip(&rule.w) {
                let q = at(a + (s - a) * y);
                let (d, f) = self.phi(&p, &q, local);
                inner += wy * if local { d } else { f };
            }
            acc += wx * (b - a) * (s - a) * inner;
        }
        acc
    }

    /// Σ over grid cells of ∫∫_{cell^2} (Φ - Φ_0).
    fn local_correction(&self, rule: &Rule) -> f64 {
        let grid = self.grid.as_ref().expect("local correction needs a grid");
        let h = self.horizon;
        let ncells = grid.len() as u64;
        let last = (0..ncells).take_while(|&i| grid.cell_bounds(i).0 < h).count() as u64;
        const CHUNK: u64 = 256;
        let chunks: Vec<f64> = (0..last.div_ceil(CHUNK))
            .into_par_iter()
            .map(|ch| {
                let mut acc = CompensatedSum::new();
                for i in ch * CHUNK..((ch + 1) * CHUNK).min(last) {
                    acc.add(self.cell_correction(grid, i, rule));
                }
                acc.value()
            })
            .collect();
        chunks.into_iter().collect::<CompensatedSum>().value()
    }

    fn cell_correction(&self, grid: &NodeSet, index: u64, rule: &Rule) -> f64 {
        let (left, right) = grid.cell_bounds(index);
        let width = right - left;
        let right = right.min(self.horizon);
        let mut cuts = vec![left];
        cuts.extend(self.breakpoints.iter().copied().filter(|&b| b > left && b < right));
        cuts.push(right);
        let at = |t: f64| self.point(t, Some(Cell { index, left, width, xi: (t - left) / width }));
        let mut acc = 0.0;
        for (i, w) in cuts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            acc += 2.0 * self.triangle(a, b, rule, at, true);
            for v in cuts[i + 1..].windows(2) {
                let (c, d) = (v[0], v[1]);
                for (x, wx) in rule.x.iter().zip(&rule.w) {
                    let p = at(a + (b - a) * x);
                    for (y, wy) in rule.x.iter().zip(&rule.w) {
                        let q = at(c + (d - c) * y);
                        acc += 2.0 * wx * wy * (b - a) * (d - c) * self.phi(&p, &q, true).0;
                    }
                }
            }
        }
        acc
    }
}

fn exps(slots: &Slots) -> SmallVec<[u32; 4]> {
    slots.iter().map(|s| s.1).collect()
}

fn fixed_cov(a: &Fixed, b: &Fixed) -> f64 {
    let bb = match (a.cell, b.cell) {
        (Some(x), Some(y)) => bridge_cov(&x, &y),
        _ => 0.0,
    };
    kernel(a.kind, a.t, b.kind, b.t, bb)
}
