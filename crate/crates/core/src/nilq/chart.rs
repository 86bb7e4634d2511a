use num_traits::{One, Zero};

use super::{bch, NilAlgebra, NilqError, SsrVectorField};
use crate::linz::default_basis;
use crate::matrix::{Matrix, QMatrix};
use crate::poly::{Poly, Rational};
use crate::sralg::{nilpotency_bound, PolyMap, WeightedSpace};

/// A bracket-closed subspace `𝔲⁺ ⊂ 𝔫`, stored in a filtration-adapted
/// echelon basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subalgebra {
    algebra: NilAlgebra,
    basis: Vec<Vec<Rational>>,
    degrees: Vec<Rational>,
}

fn in_span(rows: &[Vec<Rational>], v: &[Rational]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    if rows.is_empty() {
        return false;
    }
    let base = QMatrix::from_rows(rows.to_vec()).rank();
    let mut extended = rows.to_vec();
    extended.push(v.to_vec());
    QMatrix::from_rows(extended).rank() == base
}

impl Subalgebra {
    /// Verifies independence and bracket closure of a declared basis.
    pub fn new(space: &WeightedSpace, generators: &[SsrVectorField]) -> Result<Self, NilqError> {
        let algebra = NilAlgebra::new(space);
        let rows = generators.iter().map(|g| algebra.coords(g)).collect::<Result<Vec<_>, _>>()?;
        if !rows.is_empty() && QMatrix::from_rows(rows.clone()).rank() != rows.len() {
            return Err(NilqError::InvalidSubalgebra("basis is linearly dependent".into()));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                let c = algebra.coords(&a.bracket(b)?)?;
                if !in_span(&rows, &c) {
                    return Err(NilqError::InvalidSubalgebra("span is not closed under the bracket".into()));
                }
            }
        }
        let (basis, degrees) = algebra.echelon(&rows);
        Ok(Subalgebra { algebra, basis, degrees })
    }

    /// Smallest subalgebra containing `generators`.
    pub fn generated_by(space: &WeightedSpace, generators: &[SsrVectorField]) -> Result<Self, NilqError> {
        let algebra = NilAlgebra::new(space);
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut fields: Vec<SsrVectorField> = Vec::new();
        let push = |f: SsrVectorField, rows: &mut Vec<Vec<Rational>>, fields: &mut Vec<SsrVectorField>| {
            let c = algebra.coords(&f)?;
            if !in_span(rows, &c) {
                rows.push(c);
                fields.push(f);
            }
            Ok::<(), NilqError>(())
        };
        for g in generators {
            push(g.clone(), &mut rows, &mut fields)?;
        }
        let mut start = 0;
        while start < fields.len() {
            let end = fields.len();
            for i in start..end {
                for j in 0..i {
                    let b = fields[j].bracket(&fields[i])?;
                    push(b, &mut rows, &mut fields)?;
                }
            }
            start = end;
        }
        Self::new(space, &fields)
    }

    pub fn algebra(&self) -> &NilAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Echelon basis vectors in `𝔫` coordinates, deepest leading degree first.
    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn degrees(&self) -> &[Rational] {
        &self.degrees
    }

    pub fn basis_field(&self, i: usize) -> SsrVectorField {
        self.algebra.field(&self.basis[i]).expect("basis vectors lie in 𝔫")
    }

    /// `Σ uᵢ bᵢ`.
    pub fn element(&self, u: &[Rational]) -> Result<SsrVectorField, NilqError> {
        combine(&self.algebra, &self.basis, u)
    }

    pub fn contains(&self, x: &SsrVectorField) -> Result<bool, NilqError> {
        Ok(in_span(&self.basis, &self.algebra.coords(x)?))
    }
}

fn combine(algebra: &NilAlgebra, basis: &[Vec<Rational>], coeffs: &[Rational]) -> Result<SsrVectorField, NilqError> {
    if coeffs.len() != basis.len() {
        return Err(NilqError::DimensionMismatch { expected: basis.len(), found: coeffs.len() });
    }
    let mut acc = vec![Rational::zero(); algebra.dim()];
    for (row, c) in basis.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (a, r) in acc.iter_mut().zip(row) {
            *a += c * r;
        }
    }
    algebra.field(&acc)
}

/// A complement `𝔳` to `𝔲⁺` compatible with the degree filtration, and the
/// coset chart `(v, u) ↦ log(exp v ∘ exp u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalChart {
    sub: Subalgebra,
    transversal: Vec<Vec<Rational>>,
    degrees: Vec<Rational>,
    // Inverse of the matrix whose rows are the 𝔳 basis then the 𝔲⁺ basis.
    split: QMatrix,
}

impl TransversalChart {
    /// Degree-by-degree orthogonal complement of the graded pieces of `𝔲⁺`.
    pub fn orthogonal(sub: &Subalgebra) -> Self {
        let alg = &sub.algebra;
        let mut rows = Vec::new();
        for d in alg.levels() {
            let idx = alg.level_indices(&d);
            let leading: Vec<Vec<Rational>> = sub
                .basis
                .iter()
                .zip(&sub.degrees)
                .filter(|(_, deg)| **deg == d)
                .map(|(r, _)| idx.iter().map(|&i| r[i].clone()).collect())
                .collect();
            let complement = if leading.is_empty() {
                (0..idx.len())
                    .map(|j| (0..idx.len()).map(|i| if i == j { Rational::one() } else { Rational::zero() }).collect())
                    .collect()
            } else {
                QMatrix::from_rows(leading).null_space()
            };
            for c in complement {
                let mut full = vec![Rational::zero(); alg.dim()];
                for (&i, x) in idx.iter().zip(c) {
                    full[i] = x;
                }
                rows.push(full);
            }
        }
        Self::with_transversal_coords(sub, &rows).expect("graded orthogonal complement is transversal")
    }

    /// Chart for a user-supplied complement.
    pub fn with_transversal(sub: &Subalgebra, transversal: &[SsrVectorField]) -> Result<Self, NilqError> {
        let rows = transversal.iter().map(|t| sub.algebra.coords(t)).collect::<Result<Vec<_>, _>>()?;
        Self::with_transversal_coords(sub, &rows)
    }

    fn with_transversal_coords(sub: &Subalgebra, rows: &[Vec<Rational>]) -> Result<Self, NilqError> {
        let alg = &sub.algebra;
        if rows.len() + sub.dim() != alg.dim() {
            return Err(NilqError::InvalidTransversal(format!(
                "dimensions {} + {} do not add up to {}",
                rows.len(),
                sub.dim(),
                alg.dim()
            )));
        }
        let (transversal, degrees) = alg.echelon(rows);
        if transversal.len() != rows.len() {
            return Err(NilqError::InvalidTransversal("transversal basis is dependent".into()));
        }
        for d in alg.levels() {
            let count = degrees.iter().chain(&sub.degrees).filter(|x| **x >= d).count();
            if count != alg.dim_at_least(&d) {
                return Err(NilqError::InvalidTransversal(format!(
                    "not compatible with the filtration at degree {}",
                    crate::poly::format_rational(&d)
                )));
            }
        }
        let stacked: Vec<Vec<Rational>> = transversal.iter().chain(&sub.basis).cloned().collect();
        let split = QMatrix::from_rows(stacked)
            .inverse()
            .ok_or_else(|| NilqError::InvalidTransversal("transversal meets the subalgebra".into()))?;
        Ok(TransversalChart { sub: sub.clone(), transversal, degrees, split })
    }

    pub fn subalgebra(&self) -> &Subalgebra {
        &self.sub
    }

    pub fn algebra(&self) -> &NilAlgebra {
        &self.sub.algebra
    }

    pub fn transversal(&self) -> &[Vec<Rational>] {
        &self.transversal
    }

    pub fn transversal_degrees(&self) -> &[Rational] {
        &self.degrees
    }

    pub fn v_dim(&self) -> usize {
        self.transversal.len()
    }

    pub fn v_element(&self, v: &[Rational]) -> Result<SsrVectorField, NilqError> {
        combine(self.algebra(), &self.transversal, v)
    }

    /// Linear decomposition `n = v + u` along `𝔫 = 𝔳 ⊕ 𝔲⁺`.
    pub fn split(&self, n: &SsrVectorField) -> Result<(Vec<Rational>, Vec<Rational>), NilqError> {
        let c = self.algebra().coords(n)?;
        let dim = c.len();
        let a: Vec<Rational> = (0..dim)
            .map(|j| (0..dim).fold(Rational::zero(), |acc, i| acc + &c[i] * &self.split[(i, j)]))
            .collect();
        let (v, u) = a.split_at(self.v_dim());
        Ok((v.to_vec(), u.to_vec()))
    }

    /// `log(exp v ∘ exp u)`.
    pub fn ch_chart(&self, v: &[Rational], u: &[Rational]) -> Result<SsrVectorField, NilqError> {
        bch(&self.v_element(v)?, &self.sub.element(u)?)
    }

    /// The `𝔳` coordinates of the right `𝔲⁺`-coset of `n`.
    pub fn coset_reduce(&self, n: &SsrVectorField) -> Result<Vec<Rational>, NilqError> {
        let (mut v, _) = self.split(n)?;
        let bound = nilpotency_bound(self.algebra().space()) + 1;
        for _ in 0..bound {
            let w = bch(&self.v_element(&v)?.neg(), n)?;
            let (dv, _) = self.split(&w)?;
            if dv.iter().all(Zero::is_zero) {
                return Ok(v);
            }
            for (a, b) in v.iter_mut().zip(dv) {
                *a += b;
            }
        }
        Err(NilqError::NoConvergence("coset reduction did not stabilise".into()))
    }

    /// `(v, u)` with `ch_chart(v, u) = n`.
    pub fn ch_inverse(&self, n: &SsrVectorField) -> Result<(Vec<Rational>, Vec<Rational>), NilqError> {
        let v = self.coset_reduce(n)?;
        let rest = bch(&self.v_element(&v)?.neg(), n)?;
        let (dv, u) = self.split(&rest)?;
        if !dv.iter().all(Zero::is_zero) {
            return Err(NilqError::NoConvergence("coset reduction left a transversal residue".into()));
        }
        Ok((v, u))
    }

    /// Parameter space of the chart: 𝔳 then 𝔲⁺ coordinates, reordered by
    /// decreasing degree. Returns the space and, for each parameter slot,
    /// its position in the concatenated `(v, u)` vector.
    pub fn param_space(&self) -> (WeightedSpace, Vec<usize>) {
        let degs: Vec<&Rational> = self.degrees.iter().chain(&self.sub.degrees).collect();
        let mut order: Vec<usize> = (0..degs.len()).collect();
        order.sort_by(|&a, &b| degs[b].cmp(degs[a]).then(a.cmp(&b)));
        let names = order
            .iter()
            .map(|&i| if i < self.v_dim() { format!("v{}", i + 1) } else { format!("u{}", i - self.v_dim() + 1) })
            .collect();
        let weights = order.iter().map(|&i| degs[i].clone()).collect();
        (WeightedSpace::new(names, weights).expect("degrees are positive"), order)
    }

    fn v_space(&self) -> WeightedSpace {
        let names = (1..=self.v_dim()).map(|i| format!("v{i}")).collect();
        WeightedSpace::new(names, self.degrees.clone()).expect("degrees are positive and sorted")
    }

    /// The chart as a polynomial map from parameters to `𝔫` coordinates.
    pub fn chart_map(&self) -> PolyMap {
        let (params, order) = self.param_space();
        let alg = self.algebra();
        let p = params.dim();
        let basis = default_basis(alg.space());
        let stacked: Vec<&Vec<Rational>> = self.transversal.iter().chain(&self.sub.basis).collect();
        let symbolic = |slots: &mut dyn Iterator<Item = usize>| {
            let zero = Poly::zero(p);
            let mut m = Matrix::zeros_like(basis.len(), basis.len(), &zero);
            for slot in slots {
                let pos = order.iter().position(|&o| o == slot).expect("slot is ordered");
                let x = alg.field(stacked[slot]).expect("basis vectors lie in 𝔫");
                let d = x.derivation_matrix(&basis);
                let var = Poly::var(p, pos);
                for i in 0..basis.len() {
                    for j in 0..basis.len() {
                        if !d[(i, j)].is_zero() {
                            m[(i, j)] = m[(i, j)].add(&var.scale(&d[(i, j)]));
                        }
                    }
                }
            }
            m.nilpotent_exp().expect("ssr derivations are nilpotent")
        };
        let ev = symbolic(&mut (0..self.v_dim()));
        let eu = symbolic(&mut (self.v_dim()..stacked.len()));
        let log = ev.mul(&eu).unipotent_log().expect("unipotent");
        let components = (0..alg.dim())
            .map(|i| {
                let (k, m) = alg.element(i);
                log[(basis.coordinate_index(k), basis.index_of(m).expect("monomial in basis"))].clone()
            })
            .collect();
        PolyMap::new(params, alg.as_space(), components).expect("chart components are well formed")
    }

    /// Linear identification of parameters with `𝔫` and its inverse.
    fn identification(&self) -> (PolyMap, PolyMap) {
        let (params, order) = self.param_space();
        let alg = self.algebra();
        let stacked: Vec<&Vec<Rational>> = self.transversal.iter().chain(&self.sub.basis).collect();
        let mut fwd = QMatrix::zeros(alg.dim(), params.dim());
        let mut inv = QMatrix::zeros(params.dim(), alg.dim());
        for (pos, &slot) in order.iter().enumerate() {
            for i in 0..alg.dim() {
                fwd[(i, pos)] = stacked[slot][i].clone();
                inv[(pos, i)] = self.split[(i, slot)].clone();
            }
        }
        let n = alg.as_space();
        (
            PolyMap::linear(&params, &n, &fwd).expect("shapes match"),
            PolyMap::linear(&n, &params, &inv).expect("shapes match"),
        )
    }

    /// The chart read in parameter coordinates on both sides.
    pub fn chart_in_params(&self) -> Result<PolyMap, NilqError> {
        let (_, inv) = self.identification();
        Ok(inv.compose_unchecked(&self.chart_map())?)
    }

    /// The inverse chart as a polynomial map from `𝔫` coordinates to parameters.
    pub fn inverse_chart_map(&self) -> Result<PolyMap, NilqError> {
        let (_, inv) = self.identification();
        let local = crate::linz::invert_sr(&self.chart_in_params()?)?;
        Ok(local.compose_unchecked(&inv)?)
    }

    /// `π_𝔳 ∘ ch⁻¹_self ∘ ch_other` restricted to `𝔳_other`, as a map `𝔳_other → 𝔳_self`.
    pub fn transition_from(&self, other: &TransversalChart) -> Result<PolyMap, NilqError> {
        if self.algebra() != other.algebra() {
            return Err(NilqError::InvalidTransversal("charts live on different algebras".into()));
        }
        let alg = self.algebra();
        let src = other.v_space();
        let mut emb = QMatrix::zeros(alg.dim(), other.v_dim());
        for (j, row) in other.transversal.iter().enumerate() {
            for i in 0..alg.dim() {
                emb[(i, j)] = row[i].clone();
            }
        }
        let embed = PolyMap::linear(&src, &alg.as_space(), &emb)?;
        let params = self.inverse_chart_map()?.compose_unchecked(&embed)?;
        let (_, order) = self.param_space();
        let components = (0..self.v_dim())
            .map(|slot| params.component(order.iter().position(|&o| o == slot).expect("slot is ordered")).clone())
            .collect();
        Ok(PolyMap::new(src, self.v_space(), components)?)
    }
}
