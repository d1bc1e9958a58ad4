use std::cmp::Ordering;
use std::fmt;

use super::nodes::{bridge_cov, Cell, NodeSet};
use super::time::TimePoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorKind {
    /// W_t
    Path,
    /// Piecewise-linear interpolation of W on the grid, evaluated at t.
    Interp,
    /// W_t minus its interpolation.
    Bridge,
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorKind::Path => "W",
            FactorKind::Interp => "L",
            FactorKind::Bridge => "B",
        })
    }
}

/// One of the Gaussian variables W_t, L_t or B_t for a fixed grid.
///
/// Interpolations at grid nodes are stored as the path value itself, so
/// conditioning at nodes produces identical factors that cancel exactly.
#[derive(Debug, Clone)]
pub struct Factor {
    kind: FactorKind,
    time: TimePoint,
    grid: Option<NodeSet>,
    cell: Option<Cell>,
}

impl Factor {
    pub fn path(time: TimePoint) -> Self {
        Self { kind: FactorKind::Path, time, grid: None, cell: None }
    }

    pub fn interp(time: TimePoint, grid: &NodeSet) -> Result<Self> {
        let cell = grid.locate(&time)?;
        if cell.on_node() {
            return Ok(Self::path(time));
        }
        Ok(Self { kind: FactorKind::Interp, time, grid: Some(grid.clone()), cell: Some(cell) })
    }

    pub fn bridge(time: TimePoint, grid: &NodeSet) -> Result<Self> {
        let cell = grid.locate(&time)?;
        Ok(Self { kind: FactorKind::Bridge, time, grid: Some(grid.clone()), cell: Some(cell) })
    }

    pub fn of_kind(kind: FactorKind, time: TimePoint, grid: Option<&NodeSet>) -> Result<Self> {
        match (kind, grid) {
            (FactorKind::Path, _) => Ok(Self::path(time)),
            (FactorKind::Interp, Some(g)) => Self::interp(time, g),
            (FactorKind::Bridge, Some(g)) => Self::bridge(time, g),
            _ => Err(Error::Config(format!("{kind} factor needs a grid"))),
        }
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn time(&self) -> TimePoint {
        self.time
    }

    pub fn grid(&self) -> Option<&NodeSet> {
        self.grid.as_ref()
    }

    pub fn cell(&self) -> Option<Cell> {
        self.cell
    }

    /// Zero-variance factor: W_0, or a bridge pinned at a node.
    pub fn is_null(&self) -> bool {
        match self.kind {
            FactorKind::Path => self.time.value() == 0.0,
            FactorKind::Interp => false,
            FactorKind::Bridge => self.cell.is_some_and(|c| c.on_node()),
        }
    }

    pub fn variance(&self) -> f64 {
        let t = self.time.value();
        match (self.kind, self.cell) {
            (FactorKind::Path, _) => t,
            (FactorKind::Interp, Some(c)) => t - c.bridge_var(),
            (FactorKind::Bridge, Some(c)) => c.bridge_var(),
            _ => unreachable!("grid factor without cell"),
        }
    }

    /// Cell of this factor's time in `grid`, computing it for path factors.
    pub fn cell_in(&self, grid: &NodeSet) -> Result<Cell> {
        match (&self.grid, self.cell) {
            (Some(g), Some(c)) if g == grid => Ok(c),
            (Some(_), _) => Err(Error::MixedNodeSets),
            (None, _) => grid.locate(&self.time),
        }
    }

    /// Same variable, ignoring how it was constructed.
    pub fn same_variable(&self, other: &Factor) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Factor {}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind.cmp(&other.kind).then_with(|| self.time.cmp(&other.time)).then_with(|| match (&self.grid, &other.grid) {
            (Some(a), Some(b)) => a.key_cmp(b),
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
        })
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.time)
    }
}

/// The kernel c(kind_a, a; kind_b, b) given both positions in one grid.
///
/// `bb` is the bridge covariance at the two positions.
#[inline]
pub fn kernel(ka: FactorKind, ta: f64, kb: FactorKind, tb: f64, bb: f64) -> f64 {
    use FactorKind::*;
    match (ka, kb) {
        (Path, Path) => ta.min(tb),
        (Interp, Interp) | (Path, Interp) | (Interp, Path) => ta.min(tb) - bb,
        (Bridge, Bridge) | (Path, Bridge) | (Bridge, Path) => bb,
        (Interp, Bridge) | (Bridge, Interp) => 0.0,
    }
}

/// E[X Y] for two factors.
pub fn cov(a: &Factor, b: &Factor) -> Result<f64> {
    let (ta, tb) = (a.time.value(), b.time.value());
    let grid = match (&a.grid, &b.grid) {
        (None, None) => return Ok(ta.min(tb)),
        (Some(g), None) | (None, Some(g)) => g,
        (Some(g), Some(h)) => {
            if g != h {
                return Err(Error::MixedNodeSets);
            }
            g
        }
    };
    let bb = bridge_cov(&a.cell_in(grid)?, &b.cell_in(grid)?);
    Ok(kernel(a.kind, ta, b.kind, tb, bb))
}
