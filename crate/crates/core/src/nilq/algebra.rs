use std::collections::HashMap;

use num_traits::Zero;

use super::{NilqError, SsrVectorField};
use crate::matrix::QMatrix;
use crate::poly::{monomials_up_to_weight, Monomial, Poly, Rational};
use crate::sralg::WeightedSpace;

/// The Lie algebra `𝔫` of strictly subresonant vector fields on a space, as
/// a graded vector space.
///
/// Basis elements are the fields `m ∂_k` with `weight(m) < λ_k`; the element
/// has degree `λ_k − weight(m) > 0` and brackets add degrees. Elements are
/// listed by decreasing degree, then direction, then exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct NilAlgebra {
    space: WeightedSpace,
    elements: Vec<(usize, Monomial)>,
    degrees: Vec<Rational>,
    index: HashMap<(usize, Monomial), usize>,
}

impl NilAlgebra {
    pub fn new(space: &WeightedSpace) -> Self {
        let mut elements: Vec<(Rational, usize, Monomial)> = Vec::new();
        for k in 0..space.dim() {
            for m in monomials_up_to_weight(space.weights(), space.weight(k)) {
                let gap = space.weight(k) - m.weight(space.weights());
                if gap > Rational::zero() {
                    elements.push((gap, k, m));
                }
            }
        }
        elements.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let degrees = elements.iter().map(|e| e.0.clone()).collect();
        let elements: Vec<(usize, Monomial)> = elements.into_iter().map(|(_, k, m)| (k, m)).collect();
        let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        NilAlgebra { space: space.clone(), elements, degrees, index }
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> (usize, &Monomial) {
        (self.elements[i].0, &self.elements[i].1)
    }

    pub fn degree(&self, i: usize) -> &Rational {
        &self.degrees[i]
    }

    pub fn degrees(&self) -> &[Rational] {
        &self.degrees
    }

    /// Distinct degrees, smallest first.
    pub fn levels(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.degrees.clone();
        out.sort();
        out.dedup();
        out
    }

    /// Basis indices of degree exactly `d`.
    pub fn level_indices(&self, d: &Rational) -> Vec<usize> {
        (0..self.dim()).filter(|&i| &self.degrees[i] == d).collect()
    }

    pub fn coords(&self, x: &SsrVectorField) -> Result<Vec<Rational>, NilqError> {
        if x.space() != &self.space {
            return Err(NilqError::DimensionMismatch { expected: self.space.dim(), found: x.space().dim() });
        }
        let mut out = vec![Rational::zero(); self.dim()];
        for (k, p) in x.components().iter().enumerate() {
            for (m, c) in p.terms() {
                out[self.index[&(k, m.clone())]] = c.clone();
            }
        }
        Ok(out)
    }

    pub fn field(&self, coords: &[Rational]) -> Result<SsrVectorField, NilqError> {
        if coords.len() != self.dim() {
            return Err(NilqError::DimensionMismatch { expected: self.dim(), found: coords.len() });
        }
        let n = self.space.dim();
        let mut components = vec![Poly::zero(n); n];
        for ((k, m), c) in self.elements.iter().zip(coords) {
            components[*k].add_term(m.clone(), c.clone());
        }
        SsrVectorField::new(self.space.clone(), components)
    }

    pub fn basis_field(&self, i: usize) -> SsrVectorField {
        let (k, m) = &self.elements[i];
        SsrVectorField::monomial(&self.space, *k, m.clone(), num_traits::One::one()).expect("basis element is ssr")
    }

    /// `𝔫` as a weighted space whose coordinate functions carry the degrees.
    pub fn as_space(&self) -> WeightedSpace {
        WeightedSpace::new((1..=self.dim()).map(|i| format!("n{i}")).collect(), self.degrees.clone())
            .expect("degrees are positive and sorted")
    }

    /// Rows reduced so that every row has a distinct leading (lowest degree)
    /// basis element; returns the rows and their leading degrees.
    pub(crate) fn echelon(&self, rows: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let n = self.dim();
        if rows.is_empty() {
            return (Vec::new(), Vec::new());
        }
        // Reverse the column order so pivots land on the lowest degree.
        let reversed: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().rev().cloned().collect()).collect();
        let (rref, pivots) = QMatrix::from_rows(reversed).rref();
        let mut out: Vec<(Rational, Vec<Rational>)> = pivots
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let row: Vec<Rational> = rref.row(i).iter().rev().cloned().collect();
                (self.degrees[n - 1 - p].clone(), row)
            })
            .collect();
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out.into_iter().map(|(d, r)| (r, d)).unzip()
    }

    /// Dimension of the span of basis elements of degree `>= d`.
    pub fn dim_at_least(&self, d: &Rational) -> usize {
        self.degrees.iter().filter(|x| *x >= d).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn basis_of_321() {
        let v = WeightedSpace::from_weights(vec![rat(3), rat(2), rat(1)]).unwrap();
        let n = NilAlgebra::new(&v);
        assert_eq!(n.dim(), 7);
        assert_eq!(n.degrees(), &[rat(3), rat(2), rat(2), rat(1), rat(1), rat(1), rat(1)]);
        assert_eq!(n.levels(), vec![rat(1), rat(2), rat(3)]);
        let x = n.basis_field(4);
        assert_eq!(n.coords(&x).unwrap()[4], rat(1));
        assert_eq!(n.field(&n.coords(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn echelon_picks_lowest_degree_leads() {
        let v = WeightedSpace::from_weights(vec![rat(2), rat(1)]).unwrap();
        let n = NilAlgebra::new(&v);
        assert_eq!(n.dim(), 3);
        // Degrees: 2 (∂x), 1 (y∂x), 1 (∂y).
        let rows = vec![vec![rat(1), rat(0), rat(2)], vec![rat(1), rat(0), rat(0)]];
        let (e, d) = n.echelon(&rows);
        assert_eq!(d, vec![rat(2), rat(1)]);
        assert_eq!(e[0], vec![rat(1), rat(0), rat(0)]);
        assert_eq!(e[1], vec![rat(0), rat(0), rat(1)]);
    }
}
