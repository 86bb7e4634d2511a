//! Exact algebra of subresonant polynomial maps between weighted filtered
//! vector spaces.

mod map;
mod serial;
mod space;

pub use map::{nilpotency_bound, Classification, MapClass, PolyMap};
pub use serial::{canonical_cmp, PolyMapSpec, TermSpec};
pub use space::{monomial_weight, SpaceSpec, WeightedSpace};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("invalid weighted space: {0}")]
    InvalidSpace(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("class violation: {0}")]
    ClassViolation(String),
    #[error("{0} is not a filtration weight")]
    NotAWeight(String),
    #[error("quotient by weight {0} leaves no coordinates")]
    EmptyQuotient(String),
    #[error("singular differential at the origin")]
    SingularDifferential,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("linear map rejected: {0}")]
    NotPolynomial(String),
    #[error("parse error: {0}")]
    Parse(String),
}
