//! Observation grids and the cell containing a time.

use std::cmp::Ordering;
use std::sync::Arc;

use super::time::{TimePoint, TimeTag, BOUNDARY_EPS};
use crate::error::{Error, Result};

/// Finite set of observation times in (0, 1], always containing 1.
/// Time 0 is an implicit anchor node.
#[derive(Debug, Clone)]
pub struct NodeSet(Arc<Repr>);

#[derive(Debug, PartialEq)]
enum Repr {
    Equidistant(u64),
    General { nodes: Vec<TimePoint>, values: Vec<f64> },
}

/// Position of a time inside the grid cell `[left, left + width)`.
///
/// `xi` is the local coordinate in `[0, 1)`; `xi == 0` means the time is a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: u64,
    pub left: f64,
    pub width: f64,
    pub xi: f64,
}

impl Cell {
    pub fn on_node(&self) -> bool {
        self.xi == 0.0
    }

    /// Variance of the Brownian bridge at this position.
    pub fn bridge_var(&self) -> f64 {
        self.width * self.xi * (1.0 - self.xi)
    }
}

/// Covariance of the bridges at two positions of the same grid.
pub fn bridge_cov(x: &Cell, y: &Cell) -> f64 {
    if x.index != y.index || x.on_node() || y.on_node() {
        return 0.0;
    }
    let (lo, hi) = if x.xi <= y.xi { (x.xi, y.xi) } else { (y.xi, x.xi) };
    x.width * lo * (1.0 - hi)
}

impl NodeSet {
    /// The grid `{k/n : 1 <= k <= n}`.
    pub fn equidistant(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("grid needs n >= 1".into()));
        }
        Ok(Self(Arc::new(Repr::Equidistant(n))))
    }

    /// Arbitrary grid. Zero is dropped, 1 is added if missing.
    pub fn general(times: impl IntoIterator<Item = TimePoint>) -> Result<Self> {
        let mut nodes: Vec<TimePoint> = times.into_iter().filter(|t| t.value() > 0.0).collect();
        nodes.sort();
        nodes.dedup_by(|a, b| a.same_point(b));
        for w in nodes.windows(2) {
            if w[0].value() == w[1].value() {
                return Err(Error::Config(format!("grid nodes {} and {} coincide in f64", w[0], w[1])));
            }
        }
        if nodes.last().is_none_or(|t| t.value() < 1.0) {
            nodes.push(TimePoint::ONE);
        }
        let values = nodes.iter().map(|t| t.value()).collect();
        Ok(Self(Arc::new(Repr::General { nodes, values })))
    }

    /// This grid with extra nodes added.
    pub fn union(&self, extra: &[TimePoint]) -> Result<Self> {
        let mut all = self.nodes();
        all.extend_from_slice(extra);
        Self::general(all)
    }

    pub fn equidistant_n(&self) -> Option<u64> {
        match *self.0 {
            Repr::Equidistant(n) => Some(n),
            Repr::General { .. } => None,
        }
    }

    /// Number of cells, equal to the number of nodes excluding 0.
    pub fn len(&self) -> usize {
        match &*self.0 {
            Repr::Equidistant(n) => *n as usize,
            Repr::General { nodes, .. } => nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<TimePoint> {
        match &*self.0 {
            Repr::Equidistant(n) => (1..=*n).map(|k| TimePoint::rational(k, *n).expect("k <= n")).collect(),
            Repr::General { nodes, .. } => nodes.clone(),
        }
    }

    /// Endpoints of cell `index` (cells are numbered from 0).
    pub fn cell_bounds(&self, index: u64) -> (f64, f64) {
        match &*self.0 {
            Repr::Equidistant(n) => (index as f64 / *n as f64, (index + 1) as f64 / *n as f64),
            Repr::General { values, .. } => {
                let i = index as usize;
                let a = if i == 0 { 0.0 } else { values[i - 1] };
                (a, values.get(i).copied().unwrap_or(1.0))
            }
        }
    }

    pub fn cell(&self, index: u64, xi: f64) -> Cell {
        let (a, b) = self.cell_bounds(index);
        Cell { index, left: a, width: b - a, xi }
    }

    /// Cell of a tagged time, exact where the tag allows.
    pub fn locate(&self, t: &TimePoint) -> Result<Cell> {
        match &*self.0 {
            Repr::Equidistant(n) => {
                let f = t.fractional(*n)?;
                let xi = if f.on_node { 0.0 } else { f.frac };
                Ok(Cell { index: f.floor, left: f.floor as f64 / *n as f64, width: 1.0 / *n as f64, xi })
            }
            Repr::General { nodes, values } => {
                if t.value() == 0.0 {
                    return Ok(self.cell(0, 0.0));
                }
                // first node strictly greater than t
                let k = values.partition_point(|&v| v <= t.value());
                for j in [k.wrapping_sub(1), k] {
                    if let Some(node) = nodes.get(j) {
                        if node.same_point(t) {
                            return Ok(self.cell(j as u64 + 1, 0.0));
                        }
                        if t.tag() == TimeTag::Float && (node.value() - t.value()).abs() < BOUNDARY_EPS {
                            return Err(Error::BoundaryAmbiguity { t: t.value(), n: nodes.len() as u64 });
                        }
                    }
                }
                Ok(self.locate_value(t.value()))
            }
        }
    }

    /// Cell of an interior quadrature point; no exactness checks.
    pub fn locate_value(&self, s: f64) -> Cell {
        match &*self.0 {
            Repr::Equidistant(n) => {
                let x = s * *n as f64;
                let i = x.floor();
                Cell { index: i as u64, left: i / *n as f64, width: 1.0 / *n as f64, xi: x - i }
            }
            Repr::General { values, .. } => {
                let k = values.partition_point(|&v| v <= s);
                let c = self.cell(k as u64, 0.0);
                if c.left == s {
                    return c;
                }
                Cell { xi: (s - c.left) / c.width, ..c }
            }
        }
    }

    /// Total order used to sort factors that carry grids.
    pub fn key_cmp(&self, other: &NodeSet) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        match (&*self.0, &*other.0) {
            (Repr::Equidistant(a), Repr::Equidistant(b)) => a.cmp(b),
            (Repr::Equidistant(_), Repr::General { .. }) => Ordering::Less,
            (Repr::General { .. }, Repr::Equidistant(_)) => Ordering::Greater,
            (Repr::General { values: a, .. }, Repr::General { values: b, .. }) => {
                a.len().cmp(&b.len()).then_with(|| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal))
            }
        }
    }
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_locate() {
        let s = NodeSet::equidistant(4).unwrap();
        let c = s.locate(&TimePoint::rational(3, 10).unwrap()).unwrap();
        assert_eq!(c.index, 1);
        assert!((c.xi - 0.2).abs() < 1e-15);
        assert!((c.bridge_var() - 0.25 * 0.2 * 0.8).abs() < 1e-16);
        assert!(s.locate(&TimePoint::rational(1, 2).unwrap()).unwrap().on_node());
        assert!(s.locate(&TimePoint::ONE).unwrap().on_node());
    }

    #[test]
    fn general_grid_contains_one_and_finds_nodes() {
        let tau = TimePoint::inv_pi();
        let s = NodeSet::equidistant(3).unwrap().union(&[tau]).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.locate(&tau).unwrap().on_node());
        let c = s.locate(&TimePoint::rational(1, 4).unwrap()).unwrap();
        assert_eq!(c.index, 0);
        assert!((c.width - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let c = s.locate(&TimePoint::from_f64(0.33).unwrap()).unwrap();
        assert_eq!(c.index, 1);
        assert!((c.left - 1.0 / std::f64::consts::PI).abs() < 1e-16);
    }

    #[test]
    fn bridge_cov_vanishes_across_cells() {
        let s = NodeSet::equidistant(2).unwrap();
        let a = s.locate(&TimePoint::rational(1, 4).unwrap()).unwrap();
        let b = s.locate(&TimePoint::rational(3, 4).unwrap()).unwrap();
        assert_eq!(bridge_cov(&a, &b), 0.0);
        assert!((bridge_cov(&a, &a) - 0.125).abs() < 1e-16);
    }
}
