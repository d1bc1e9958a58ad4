//! Wick-chaos computations for the optimal approximation of Skorohod
//! integrals from finitely many observations of the driving Brownian motion.
//!
//! The crate is organised bottom-up:
//!
//! - [`gauss_kernel`]: time points, observation grids and the joint
//!   covariance of W_t, its grid interpolation L_t and the bridge B_t.
//! - [`chaos`]: Wick monomials, expansions, exact inner products and
//!   conditioning on the grid.
//! - [`skorohod`]: integrands with separable coefficients and their Skorohod
//!   integrals via integration by parts, plus second moments by quadrature.
//! - [`engine`]: the mean squared error of the conditional-expectation
//!   approximation and its asymptotic constants.
//! - [`weyl`]: grid sizes along which irrational times behave well, and rate
//!   fitting.
//! - [`verification`]: brute-force and Monte Carlo cross-checks.
//! - [`cli`]: experiment runner used by the `wicklab` binary.

pub mod chaos;
pub mod cli;
pub mod engine;
pub mod error;
pub mod gauss_kernel;
mod numeric;
pub mod skorohod;
pub mod verification;
pub mod weyl;

pub use error::{Error, Result};
pub use numeric::{compensated_sum, CompensatedSum};
