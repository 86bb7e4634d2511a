use serde::Serialize;

use super::NformError;
use crate::poly::{format_rational, Monomial, Poly, Rational, Scalar};

/// Scalars that can be written into reports.
pub trait Coefficient: Scalar {
    fn text(&self) -> String;
    fn value(&self) -> f64;
}

impl Coefficient for Rational {
    fn text(&self) -> String {
        format_rational(self)
    }
    fn value(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coefficient for f64 {
    fn text(&self) -> String {
        format!("{self:e}")
    }
    fn value(&self) -> f64 {
        *self
    }
}

/// Truncated Taylor jet at a base point, written in coordinates centred there.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<C> {
    degree: u32,
    components: Vec<Poly<C>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JetTerm {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coefficient: String,
    pub value: f64,
}

/// Gauss–Jordan inverse; `None` when singular (exactly, or below `1e-300` in floating point).
pub(crate) fn invert_dense<C: Scalar>(m: &[Vec<C>]) -> Option<Vec<Vec<C>>> {
    let n = m.len();
    let mut a: Vec<Vec<C>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().cloned().chain((0..n).map(|j| if i == j { C::one() } else { C::zero() })).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))?;
        if a[piv][col].is_zero() || a[piv][col].magnitude() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let v = a[r][c].clone() - f.clone() * a[col][c].clone();
                a[r][c] = v;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn apply_linear<C: Scalar>(m: &[Vec<C>], v: &[Poly<C>]) -> Vec<Poly<C>> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Poly::zero(v[0].nvars()), |acc, (c, p)| acc.add(&p.scale(c))))
        .collect()
}

impl<C: Scalar> Jet<C> {
    /// Truncates the components at `degree`. The jet must fix the base point.
    pub fn new(components: Vec<Poly<C>>, degree: u32) -> Result<Self, NformError> {
        let n = components.len();
        if n == 0 || components.iter().any(|p| p.nvars() != n) {
            return Err(NformError::Shape("a jet must be a self-map with one component per variable".into()));
        }
        if degree == 0 {
            return Err(NformError::Shape("jet degree must be at least 1".into()));
        }
        if components.iter().any(|p| !p.constant_term().is_zero()) {
            return Err(NformError::Shape("jet must fix the base point".into()));
        }
        Ok(Jet { degree, components: components.into_iter().map(|p| p.truncate(degree)).collect() })
    }

    pub fn identity(dim: usize, degree: u32) -> Self {
        Jet { degree, components: (0..dim).map(|i| Poly::var(dim, i)).collect() }
    }

    pub fn linear(matrix: &[Vec<C>], degree: u32) -> Result<Self, NformError> {
        let n = matrix.len();
        let comps = matrix
            .iter()
            .map(|row| Poly::from_terms(n, row.iter().enumerate().map(|(j, c)| (Monomial::var(n, j), c.clone()))))
            .collect();
        Self::new(comps, degree)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[Poly<C>] {
        &self.components
    }

    pub fn linear_part(&self) -> Vec<Vec<C>> {
        let n = self.dim();
        self.components.iter().map(|p| (0..n).map(|j| p.coeff(&Monomial::var(n, j))).collect()).collect()
    }

    /// `self ∘ inner`, truncated at the smaller degree.
    pub fn compose(&self, inner: &Jet<C>) -> Result<Jet<C>, NformError> {
        if self.dim() != inner.dim() {
            return Err(NformError::Shape(format!("cannot compose jets of dimension {} and {}", self.dim(), inner.dim())));
        }
        let degree = self.degree.min(inner.degree);
        let components = self.components.iter().map(|p| p.compose_truncated(&inner.components, Some(degree))).collect();
        Ok(Jet { degree, components })
    }

    /// Series reversion: `G = L⁻¹(y − N∘G)` iterated once per degree.
    pub fn invert(&self) -> Result<Jet<C>, NformError> {
        let linv = invert_dense(&self.linear_part()).ok_or(NformError::SingularLinearPart)?;
        let n = self.dim();
        let nonlinear: Vec<Poly<C>> = self.components.iter().map(|p| p.filter(|m, _| m.degree() >= 2)).collect();
        let ident: Vec<Poly<C>> = (0..n).map(|i| Poly::var(n, i)).collect();
        let mut g = apply_linear(&linv, &ident);
        for _ in 1..self.degree {
            let nl: Vec<Poly<C>> = nonlinear.iter().map(|p| p.compose_truncated(&g, Some(self.degree))).collect();
            let rhs: Vec<Poly<C>> = ident.iter().zip(&nl).map(|(y, q)| y.sub(q)).collect();
            g = apply_linear(&linv, &rhs).into_iter().map(|p| p.truncate(self.degree)).collect();
        }
        Ok(Jet { degree: self.degree, components: g })
    }

    pub fn add(&self, other: &Jet<C>) -> Jet<C> {
        Jet {
            degree: self.degree.min(other.degree),
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// Largest coefficient of `self − other`.
    pub fn distance(&self, other: &Jet<C>) -> f64 {
        crate::poly::max_coeff_distance(&self.components, &other.components)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Jet::identity(self.dim(), self.degree)
    }

    pub fn eval(&self, point: &[C]) -> Vec<C> {
        self.components.iter().map(|p| p.eval(point)).collect()
    }

    pub fn map_coeffs<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Jet<D> {
        Jet { degree: self.degree, components: self.components.iter().map(|p| p.map_coeffs(&f)).collect() }
    }
}

impl<C: Coefficient> Jet<C> {
    /// Terms in component order, then monomial order.
    pub fn terms(&self) -> Vec<JetTerm> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(k, p)| {
                p.terms().map(move |(m, c)| JetTerm { component: k, exponents: m.exps().to_vec(), coefficient: c.text(), value: c.value() })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn x1() -> Poly<Rational> {
        Poly::var(1, 0)
    }

    #[test]
    fn series_reversion() {
        let f = Jet::new(vec![x1().scale(&rat(2)).add(&x1().mul(&x1()))], 3).unwrap();
        let g = f.invert().unwrap();
        let x = x1();
        let want = x.scale(&ratio(1, 2)).add(&x.mul(&x).scale(&ratio(-1, 8))).add(&x.mul(&x).mul(&x).scale(&ratio(1, 16)));
        assert_eq!(g.components()[0], want);
        assert!(f.compose(&g).unwrap().is_identity());
        assert!(g.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn identity_is_neutral() {
        let f = Jet::new(vec![x1().scale(&rat(3)).add(&x1().mul(&x1()))], 4).unwrap();
        assert_eq!(f.compose(&Jet::identity(1, 4)).unwrap(), f);
        assert_eq!(Jet::identity(1, 4).compose(&f).unwrap(), f);
    }

    #[test]
    fn singular_and_affine_rejected() {
        let f = Jet::new(vec![x1().mul(&x1())], 3).unwrap();
        assert_eq!(f.invert(), Err(NformError::SingularLinearPart));
        assert!(Jet::new(vec![x1().add(&Poly::constant(1, rat(1)))], 2).is_err());
    }
}
