//! Subresonant polynomial algebra and finite-horizon cocycle numerics.
//!
//! * [`sralg`]: weighted filtered spaces and exact subresonant maps.
//! * [`linz`]: the evaluation embedding and matrix linearization.
//! * [`nilq`]: strictly subresonant vector fields, BCH, coset charts, Haar volume.
//! * [`cocyc`]: Lyapunov spectra, Oseledets flags, adapted norms, stable manifolds.
//! * [`nform`]: jets, normal forms along orbits, graded holonomies.

pub mod cocyc;
pub mod linz;
pub mod matrix;
pub mod nform;
pub mod nilq;
pub mod poly;
pub mod rng;
pub mod sample;
pub mod sralg;
pub mod suite;
