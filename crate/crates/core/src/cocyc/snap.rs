use num_traits::ToPrimitive;

use super::CocycError;
use crate::poly::Rational;

/// Matches each exponent `λ_i` to `unit · w_i` from a declared rational
/// profile. Every match must lie within `tol`; otherwise the handoff is refused.
pub fn snap_to_profile(exponents: &[f64], profile: &[Rational], unit: f64, tol: f64) -> Result<Vec<Rational>, CocycError> {
    if exponents.len() != profile.len() {
        return Err(CocycError::Shape(format!("{} exponents for a profile of {}", exponents.len(), profile.len())));
    }
    if unit == 0.0 || !unit.is_finite() {
        return Err(CocycError::Invalid("snapping unit must be finite and non-zero".into()));
    }
    for (&e, w) in exponents.iter().zip(profile) {
        let target = unit * w.to_f64().unwrap_or(f64::NAN);
        if !((e - target).abs() <= tol) {
            return Err(CocycError::SnapRefused { exponent: e, tol });
        }
    }
    Ok(profile.to_vec())
}
