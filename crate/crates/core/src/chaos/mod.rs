//! Wick monomials and finite chaos expansions over the factors W, L, B.

mod expansion;
mod monomial;
mod pairing;

pub use expansion::{bridge_expand, integrability_index, ChaosExpansion};
pub use monomial::{wick_inner, Factors, WickMonomial};
pub use pairing::pairing_sum;
