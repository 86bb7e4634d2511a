use num_traits::Zero;

use super::NilqError;
use crate::linz::{default_basis, delinearize, linearize, LinBasis};
use crate::matrix::QMatrix;
use crate::poly::{format_rational, Monomial, Poly, Rational};
use crate::sralg::{PolyMap, WeightedSpace};

/// A polynomial vector field `Σ_k X_k ∂_k` whose every coefficient term has
/// weight strictly below the weight of its direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SsrVectorField {
    space: WeightedSpace,
    components: Vec<Poly<Rational>>,
}

impl SsrVectorField {
    pub fn new(space: WeightedSpace, components: Vec<Poly<Rational>>) -> Result<Self, NilqError> {
        if components.len() != space.dim() {
            return Err(NilqError::DimensionMismatch { expected: space.dim(), found: components.len() });
        }
        for (k, p) in components.iter().enumerate() {
            if p.nvars() != space.dim() {
                return Err(NilqError::DimensionMismatch { expected: space.dim(), found: p.nvars() });
            }
            for (m, _) in p.terms() {
                let w = m.weight(space.weights());
                if &w >= space.weight(k) {
                    return Err(NilqError::NotStrictlySubresonant(format!(
                        "term {:?} in direction {} has weight {} >= {}",
                        m.exps(),
                        space.coords()[k],
                        format_rational(&w),
                        format_rational(space.weight(k))
                    )));
                }
            }
        }
        Ok(SsrVectorField { space, components })
    }

    pub fn zero(space: &WeightedSpace) -> Self {
        let n = space.dim();
        SsrVectorField { space: space.clone(), components: vec![Poly::zero(n); n] }
    }

    /// `c · m ∂_k`.
    pub fn monomial(space: &WeightedSpace, k: usize, m: Monomial, c: Rational) -> Result<Self, NilqError> {
        let mut components = vec![Poly::zero(space.dim()); space.dim()];
        components[k] = Poly::monomial(m, c);
        Self::new(space.clone(), components)
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn components(&self) -> &[Poly<Rational>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Poly<Rational> {
        &self.components[k]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<(), NilqError> {
        if self.space != other.space {
            return Err(NilqError::DimensionMismatch { expected: self.space.dim(), found: other.space.dim() });
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Poly<Rational>, &Poly<Rational>) -> Poly<Rational>) -> Self {
        let components = self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect();
        SsrVectorField { space: self.space.clone(), components }
    }

    pub fn add(&self, other: &Self) -> Result<Self, NilqError> {
        self.check_same(other)?;
        Ok(self.zip(other, Poly::add))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NilqError> {
        self.check_same(other)?;
        Ok(self.zip(other, Poly::sub))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        SsrVectorField { space: self.space.clone(), components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn neg(&self) -> Self {
        SsrVectorField { space: self.space.clone(), components: self.components.iter().map(Poly::neg).collect() }
    }

    /// The derivation `p ↦ Σ_k X_k ∂_k p`.
    pub fn apply(&self, p: &Poly<Rational>) -> Poly<Rational> {
        let mut out = Poly::zero(self.space.dim());
        for (k, xk) in self.components.iter().enumerate() {
            if !xk.is_zero() {
                out = out.add(&xk.mul(&p.derivative(k)));
            }
        }
        out
    }

    /// `[X, Y]_k = X(Y_k) − Y(X_k)`.
    pub fn bracket(&self, other: &Self) -> Result<Self, NilqError> {
        self.check_same(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(xk, yk)| self.apply(yk).sub(&other.apply(xk)))
            .collect();
        Ok(SsrVectorField { space: self.space.clone(), components })
    }

    /// Matrix of the derivation on `P_V`: row `b` holds the coefficients of `X(b)`.
    pub fn derivation_matrix(&self, basis: &LinBasis) -> QMatrix {
        let mut m = QMatrix::zeros(basis.len(), basis.len());
        for (i, b) in basis.monomials().iter().enumerate() {
            let image = self.apply(&Poly::monomial(b.clone(), num_traits::One::one()));
            let row = basis.coefficients(&image).expect("derivations lower weight");
            for (j, c) in row.into_iter().enumerate() {
                if !c.is_zero() {
                    m[(i, j)] = c;
                }
            }
        }
        m
    }

    /// Reads a field back from a derivation matrix (rows of the coordinate functions).
    pub fn from_derivation_matrix(m: &QMatrix, basis: &LinBasis) -> Result<Self, NilqError> {
        let space = basis.space().clone();
        let components = (0..space.dim()).map(|k| basis.polynomial(m.row(basis.coordinate_index(k)))).collect();
        let x = Self::new(space, components)?;
        if &x.derivation_matrix(basis) != m {
            return Err(NilqError::NotStrictlySubresonant("matrix is not a derivation".into()));
        }
        Ok(x)
    }
}

/// Time-one flow of `X`, as `exp` of its nilpotent derivation matrix.
pub fn exp_ssr(x: &SsrVectorField) -> Result<PolyMap, NilqError> {
    let basis = default_basis(x.space());
    let d = x.derivation_matrix(&basis);
    let e = d.nilpotent_exp().ok_or_else(|| NilqError::NotStrictlySubresonant("derivation is not nilpotent".into()))?;
    Ok(delinearize(&e, &basis)?)
}

/// The unique strictly subresonant field with `exp_ssr(log_ssr(F)) = F`.
pub fn log_ssr(f: &PolyMap) -> Result<SsrVectorField, NilqError> {
    if !f.is_strictly_subresonant() {
        return Err(NilqError::NotStrictlySubresonant("log requires a strictly subresonant map".into()));
    }
    let rep = linearize(f)?;
    let l = rep
        .matrix
        .unipotent_log()
        .ok_or_else(|| NilqError::NotStrictlySubresonant("linearization is not unipotent".into()))?;
    SsrVectorField::from_derivation_matrix(&l, &rep.basis_src)
}

/// `Z` with `exp Z = exp X ∘ exp Y`.
pub fn bch(x: &SsrVectorField, y: &SsrVectorField) -> Result<SsrVectorField, NilqError> {
    x.check_same(y)?;
    let basis = default_basis(x.space());
    let ex = x.derivation_matrix(&basis).nilpotent_exp().expect("ssr derivations are nilpotent");
    let ey = y.derivation_matrix(&basis).nilpotent_exp().expect("ssr derivations are nilpotent");
    let l = ex.mul(&ey).unipotent_log().expect("product of unipotents is unipotent");
    SsrVectorField::from_derivation_matrix(&l, &basis)
}
