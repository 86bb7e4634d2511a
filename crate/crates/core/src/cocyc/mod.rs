//! Finite-horizon numerics for linear cocycles over explicit dynamics.
//!
//! A [`CocycleTrace`] records an orbit and the matrices along it. Exponents
//! come from the QR recursion, flags from forward and backward QR passes,
//! adapted norms from unit-step discretized sums, and stable manifolds of
//! fixed points from the invariance equation solved degree by degree.

mod flags;
mod lyapunov;
mod norm;
mod real;
mod snap;
mod stable;
mod system;
mod tempered;
mod trace;

pub use flags::{oseledets_flags, qr_frames, subspace_distance, transversality, FlagLevel, OseledetsFlags, QrFrames};
pub use lyapunov::{default_warmup, lyapunov_qr, lyapunov_qr_with, LyapunovEstimate};
pub use norm::{adapted_norm, AdaptedNorm, BlockInfo, ContractionCheck, NormSummary};
pub use real::Real;
pub use snap::snap_to_profile;
pub use stable::{local_stable_manifold, solve_graph, GraphJet, StableManifold};
pub use system::{toral_orbit_exact, SystemDef, SystemKind};
pub use tempered::{check_tempered, TemperedReport};
pub use trace::{CocycleTrace, Precision};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycError {
    #[error("singular cocycle matrix at step {0}")]
    SingularStep(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("horizon error: {0}")]
    Horizon(String),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("unresolved flags: {0}")]
    Unresolved(String),
    #[error("ε = {epsilon} is not below half the minimal resolved gap {gap}")]
    EpsilonTooLarge { epsilon: f64, gap: f64 },
    #[error("small divisor {divisor:e} at {slot}")]
    SmallDivisor { slot: String, divisor: f64 },
    #[error("fixed point is not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("exponent {exponent} has no profile weight within {tol}")]
    SnapRefused { exponent: f64, tol: f64 },
}
