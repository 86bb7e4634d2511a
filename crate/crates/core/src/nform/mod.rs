//! Truncated jets, the subresonant split `A = PA + R`, normal forms at fixed
//! points and along orbits, and graded holonomies.

mod holonomy;
mod jet;
mod normal;

pub use holonomy::{holonomy_graded, stable_leaf_pair, HolonomyResult};
pub use jet::{Coefficient, Jet, JetTerm};
pub use normal::{
    choose_degree, fit_rate, normal_form_fixed_point, normal_form_orbit, sr_split, ConjugacyReport, ConjugacyResult,
    Verdict,
};

use thiserror::Error;

use crate::cocyc::CocycError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NformError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("singular linear part")]
    SingularLinearPart,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("linear part is not diagonal")]
    NotDiagonal,
    #[error("fixed point is not contracting")]
    NotContracting,
    #[error("small divisor {divisor:e} at {slot}")]
    SmallDivisor { slot: String, divisor: f64 },
    #[error(transparent)]
    Cocyc(#[from] CocycError),
}
