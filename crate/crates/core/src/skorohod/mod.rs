//! Separable integrands, their Skorohod integrals, and second moments.

mod coeff;
mod integral;
mod integrand;
mod moment;

pub use coeff::{CoeffFn, CoeffTerm};
pub use integral::{boundary_increment, skorohod_integral, time_integral, SkorohodResult, TimeTerm};
pub use integrand::{Coordinate, IntegrandSpec, IntegrandTerm};
pub use moment::{second_moment, second_moment_parts, MomentParts, QuadratureConfig};
