//! The nilpotent Lie algebra `𝔫` of strictly subresonant vector fields.
//!
//! Exponential and logarithm go through the linearization: a field acts on
//! `P_V` as a nilpotent derivation, its flow as the matrix exponential.
//! Matrix products reverse the order of pullbacks, so `bch(X, Y)` satisfies
//! `exp_ssr(bch(X, Y)) = exp_ssr(X) ∘ exp_ssr(Y)` and expands as
//! `X + Y − ½[X, Y] + …` in terms of the vector field bracket.

mod algebra;
mod chart;
mod field;
mod haar;

pub use algebra::NilAlgebra;
pub use chart::{Subalgebra, TransversalChart};
pub use field::{bch, exp_ssr, log_ssr, SsrVectorField};
pub use haar::{haar_pushforward, haar_volume, left_translation, left_translation_jacobian};

use thiserror::Error;

use crate::sralg::AlgebraError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NilqError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not strictly subresonant: {0}")]
    NotStrictlySubresonant(String),
    #[error("invalid subalgebra: {0}")]
    InvalidSubalgebra(String),
    #[error("invalid transversal: {0}")]
    InvalidTransversal(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("degenerate box {0}")]
    DegenerateBox(String),
}
