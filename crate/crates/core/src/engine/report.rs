use serde::Serialize;

use crate::error::Result;
use crate::gauss_kernel::NodeSet;
use crate::numeric::CompensatedSum;
use crate::skorohod::{second_moment, second_moment_parts, skorohod_integral, IntegrandSpec, QuadratureConfig, SkorohodResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorComponents {
    /// E[b^2] for the boundary part b of Y - Ŷ
    pub boundary: f64,
    /// ∫ E[b A(s)] ds
    pub cross: f64,
    /// ∫∫ E[A(s) A(u)] ds du
    pub double: f64,
    /// E[Y^2]
    pub moment: f64,
    /// E[Ŷ^2]
    pub projected_moment: f64,
    /// |e^2 - (E[Y^2] - E[Ŷ^2])|
    pub projection_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    /// Number of grid cells.
    pub n: usize,
    pub e2: f64,
    pub e: f64,
    /// Bound on |e^2 - e^2 of the untruncated integrand|.
    pub truncation_bound: f64,
    pub components: ErrorComponents,
    /// Contribution of each Wiener chaos, when the computation is organised
    /// that way.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chaos_components: Vec<f64>,
    /// Two fixed times share a grid cell.
    pub pre_asymptotic: bool,
}

impl ErrorReport {
    pub(crate) fn from_e2(n: usize, e2: f64, truncation_bound: f64, components: ErrorComponents) -> Self {
        Self { n, e2, e: e2.max(0.0).sqrt(), truncation_bound, components, chaos_components: Vec::new(), pre_asymptotic: false }
    }
}

/// e_n^2 = E[(Y - E[Y | W on grid])^2] for Y the Skorohod integral of `u`.
pub fn mse(u: &IntegrandSpec, grid: &NodeSet, quad: &QuadratureConfig) -> Result<ErrorReport> {
    let y = skorohod_integral(u)?;
    let mut report = mse_of(&y, grid, quad)?;
    report.pre_asymptotic = shares_cell(u, grid)?;
    Ok(report)
}

pub fn mse_of(y: &SkorohodResult, grid: &NodeSet, quad: &QuadratureConfig) -> Result<ErrorReport> {
    let d = y.condition_residual(grid)?;
    let parts = second_moment_parts(&d, quad)?;
    let e2 = parts.total();
    let moment = second_moment(y, quad)?;
    let projected = second_moment(&y.condition(grid)?, quad)?;
    let mut gap = CompensatedSum::new();
    gap.add(e2);
    gap.add(-moment);
    gap.add(projected);
    let components = ErrorComponents {
        boundary: parts.boundary,
        cross: parts.cross,
        double: parts.double,
        moment,
        projected_moment: projected,
        projection_gap: gap.value().abs(),
    };
    let delta = y.tail_bound.sqrt();
    let e = e2.max(0.0).sqrt();
    Ok(ErrorReport::from_e2(grid.len(), e2, 2.0 * e * delta + delta * delta, components))
}

fn shares_cell(u: &IntegrandSpec, grid: &NodeSet) -> Result<bool> {
    let mut cells = Vec::new();
    for t in &u.taus {
        let c = grid.locate(t)?;
        if !c.on_node() {
            cells.push(c.index);
        }
    }
    cells.sort_unstable();
    Ok(cells.windows(2).any(|w| w[0] == w[1]))
}
