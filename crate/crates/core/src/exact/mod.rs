//! Exact arithmetic: rationals, integer polynomials, determinants,
//! resultants and truncated Laurent series.

pub mod det;
pub mod laurent;
pub mod poly;
pub mod rational;
pub mod resultant;

use thiserror::Error;

pub use det::{det_bareiss, det_cofactor, poly_det, poly_det_capped};
pub use laurent::{LaurentScalar, PlaceValue, Valuation};
pub use poly::{Monomial, MultiPoly};
pub use rational::{format_rational, int, parse_rational, rat, Rational};
pub use resultant::{resultant, resultant_capped, sylvester_matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// The place of the t-adic valuation ring evaluated at `a`.
pub fn laurent_place(a: &LaurentScalar) -> Result<PlaceValue, ExactError> {
    a.place()
}
