use num_traits::Zero;

use super::{AlgebraError, WeightedSpace};
use crate::matrix::QMatrix;
use crate::poly::{Monomial, Poly, Rational, Scalar};

/// Polynomial map between weighted spaces with exact rational coefficients.
///
/// `components[k]` is the pullback of the k-th target coordinate, a
/// polynomial in the source coordinates.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMap {
    source: WeightedSpace,
    target: WeightedSpace,
    components: Vec<Poly<Rational>>,
}

/// Which of the filtration classes a map belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Classification {
    pub subresonant: bool,
    pub resonant: bool,
    pub strictly_subresonant: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MapClass {
    StrictlySubresonant,
    Resonant,
    Subresonant,
    None,
}

impl Classification {
    /// Tightest class; the identity is both resonant and strictly
    /// subresonant and reports the latter.
    pub fn tightest(&self) -> MapClass {
        if self.strictly_subresonant {
            MapClass::StrictlySubresonant
        } else if self.resonant {
            MapClass::Resonant
        } else if self.subresonant {
            MapClass::Subresonant
        } else {
            MapClass::None
        }
    }
}

impl PolyMap {
    pub fn new(
        source: WeightedSpace,
        target: WeightedSpace,
        components: Vec<Poly<Rational>>,
    ) -> Result<Self, AlgebraError> {
        if components.len() != target.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: target.dim(), found: components.len() });
        }
        if let Some(bad) = components.iter().find(|p| p.nvars() != source.dim()) {
            return Err(AlgebraError::DimensionMismatch { expected: source.dim(), found: bad.nvars() });
        }
        Ok(PolyMap { source, target, components })
    }

    pub fn identity(space: &WeightedSpace) -> Self {
        let n = space.dim();
        PolyMap {
            source: space.clone(),
            target: space.clone(),
            components: (0..n).map(|i| Poly::var(n, i)).collect(),
        }
    }

    /// `v ↦ v + u`.
    pub fn translation(space: &WeightedSpace, u: &[Rational]) -> Result<Self, AlgebraError> {
        space.check_point(u)?;
        let n = space.dim();
        let components =
            (0..n).map(|i| Poly::var(n, i).add(&Poly::constant(n, u[i].clone()))).collect();
        Ok(PolyMap { source: space.clone(), target: space.clone(), components })
    }

    /// Linear map `v ↦ M v` with `M` of shape `target × source`.
    pub fn linear(source: &WeightedSpace, target: &WeightedSpace, m: &QMatrix) -> Result<Self, AlgebraError> {
        if m.nrows() != target.dim() || m.ncols() != source.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: target.dim(), found: m.nrows() });
        }
        let n = source.dim();
        let components = (0..target.dim())
            .map(|k| Poly::from_terms(n, (0..n).map(|j| (Monomial::var(n, j), m[(k, j)].clone()))))
            .collect();
        Ok(PolyMap { source: source.clone(), target: target.clone(), components })
    }

    pub fn source(&self) -> &WeightedSpace {
        &self.source
    }

    pub fn target(&self) -> &WeightedSpace {
        &self.target
    }

    pub fn components(&self) -> &[Poly<Rational>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Poly<Rational> {
        &self.components[k]
    }

    /// Iterates `(component, monomial, coefficient)` over all stored terms.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Monomial, &Rational)> {
        self.components.iter().enumerate().flat_map(|(k, p)| p.terms().map(move |(m, c)| (k, m, c)))
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && *self == PolyMap::identity(&self.source)
    }

    pub fn max_degree(&self) -> u32 {
        self.components.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, p: &[Rational]) -> Result<Vec<Rational>, AlgebraError> {
        self.source.check_point(p)?;
        Ok(self.components.iter().map(|c| c.eval(p)).collect())
    }

    pub fn eval_scalar<C: Scalar>(&self, p: &[C]) -> Result<Vec<C>, AlgebraError> {
        self.source.check_point(p)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.terms().fold(C::zero(), |acc, (m, k)| acc + C::from_rational(k) * m.eval(p)))
            .collect())
    }

    /// Source weight of every stored term, with its component index.
    fn term_weights(&self) -> impl Iterator<Item = (usize, &Monomial, Rational)> + '_ {
        self.terms().map(|(k, m, _)| (k, m, m.weight(self.source.weights())))
    }

    pub fn classify(&self) -> Classification {
        let subresonant = self.term_weights().all(|(k, _, w)| &w <= self.target.weight(k));
        let resonant = self.term_weights().all(|(k, _, w)| &w == self.target.weight(k));
        let strictly_subresonant = self.source == self.target && {
            let n = self.source.dim();
            self.components.iter().enumerate().all(|(k, p)| {
                let rest = p.sub(&Poly::var(n, k));
                let ok = rest.terms().all(|(m, _)| &m.weight(self.source.weights()) < self.target.weight(k));
                ok
            })
        };
        Classification { subresonant, resonant, strictly_subresonant }
    }

    pub fn is_subresonant(&self) -> bool {
        self.classify().subresonant
    }

    pub fn is_strictly_subresonant(&self) -> bool {
        self.classify().strictly_subresonant
    }

    /// `self ∘ inner`, exact, without any class checks.
    pub fn compose_unchecked(&self, inner: &PolyMap) -> Result<PolyMap, AlgebraError> {
        if inner.target != self.source {
            return Err(AlgebraError::SpaceMismatch(format!(
                "cannot compose: inner target [{}] differs from outer source [{}]",
                inner.target, self.source
            )));
        }
        let components = self.components.iter().map(|p| p.compose(&inner.components)).collect();
        Ok(PolyMap { source: inner.source.clone(), target: self.target.clone(), components })
    }

    /// `self ∘ inner` for subresonant maps; the result is checked to stay subresonant.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap, AlgebraError> {
        for (name, m) in [("outer", self), ("inner", inner)] {
            if !m.is_subresonant() {
                return Err(AlgebraError::ClassViolation(format!("{name} map of composition is not subresonant")));
            }
        }
        let out = self.compose_unchecked(inner)?;
        if !out.is_subresonant() {
            return Err(AlgebraError::ClassViolation("composition escaped the weight budget".into()));
        }
        Ok(out)
    }

    pub fn add(&self, other: &PolyMap) -> Result<PolyMap, AlgebraError> {
        if self.source != other.source || self.target != other.target {
            return Err(AlgebraError::SpaceMismatch("cannot add maps between different spaces".into()));
        }
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect();
        Ok(PolyMap { source: self.source.clone(), target: self.target.clone(), components })
    }

    pub fn sub(&self, other: &PolyMap) -> Result<PolyMap, AlgebraError> {
        if self.source != other.source || self.target != other.target {
            return Err(AlgebraError::SpaceMismatch("cannot subtract maps between different spaces".into()));
        }
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect();
        Ok(PolyMap { source: self.source.clone(), target: self.target.clone(), components })
    }

    /// Inverse of a strictly subresonant map via the fixed point
    /// `G ← id − (F − id)∘G`, which stabilises by nilpotency.
    pub fn invert_ssr(&self) -> Result<PolyMap, AlgebraError> {
        if !self.is_strictly_subresonant() {
            return Err(AlgebraError::ClassViolation("map is not strictly subresonant".into()));
        }
        let id = PolyMap::identity(&self.source);
        let nonlinear = self.sub(&id)?;
        // Each sweep fixes at least one more weight level of F∘G − id.
        let bound = nilpotency_bound(&self.source);
        let mut g = id.clone();
        for _ in 0..=bound {
            let next = id.sub(&nonlinear.compose_unchecked(&g)?)?;
            if next == g {
                debug_assert!(self.compose_unchecked(&g)?.is_identity());
                return Ok(g);
            }
            g = next;
        }
        Err(AlgebraError::NoConvergence("strictly subresonant inversion did not stabilise".into()))
    }

    /// Jacobian matrix at `p`, shape `target × source`.
    pub fn differential_at(&self, p: &[Rational]) -> Result<QMatrix, AlgebraError> {
        self.source.check_point(p)?;
        if !self.is_subresonant() {
            return Err(AlgebraError::ClassViolation("differential requested for a non-subresonant map".into()));
        }
        let mut d = QMatrix::zeros(self.target.dim(), self.source.dim());
        for (k, comp) in self.components.iter().enumerate() {
            for j in 0..self.source.dim() {
                d[(k, j)] = comp.derivative(j).eval(p);
            }
        }
        Ok(d)
    }

    /// Induced map `V/V^{≤−λ} → W/W^{≤−λ}`.
    pub fn quotient_map(&self, lambda: &Rational) -> Result<PolyMap, AlgebraError> {
        let is_weight = self.source.weights().contains(lambda) || self.target.weights().contains(lambda);
        if !is_weight {
            return Err(AlgebraError::NotAWeight(crate::poly::format_rational(lambda)));
        }
        if !self.is_subresonant() {
            return Err(AlgebraError::ClassViolation("quotient of a non-subresonant map".into()));
        }
        let (src, kept_src) = self.source.quotient(lambda)?;
        let (tgt, kept_tgt) = self.target.quotient(lambda)?;
        let n = src.dim();
        let components = kept_tgt
            .iter()
            .map(|&k| {
                let p = self.components[k].filter(|m, _| {
                    m.exps().iter().enumerate().all(|(i, &e)| e == 0 || kept_src.contains(&i))
                });
                p.remap_monomials(n, |m| Monomial(kept_src.iter().map(|&i| m.exps()[i]).collect()))
            })
            .collect();
        Ok(PolyMap { source: src, target: tgt, components })
    }

    /// Weight-zero part: terms whose weight equals the target weight.
    pub fn resonant_part(&self) -> PolyMap {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(k, p)| p.filter(|m, _| &m.weight(self.source.weights()) == self.target.weight(k)))
            .collect();
        PolyMap { source: self.source.clone(), target: self.target.clone(), components }
    }

    /// Linear part (degree-one terms) as a `target × source` matrix.
    pub fn linear_part(&self) -> QMatrix {
        let n = self.source.dim();
        let mut m = QMatrix::zeros(self.target.dim(), n);
        for (k, p) in self.components.iter().enumerate() {
            for j in 0..n {
                m[(k, j)] = p.coeff(&Monomial::var(n, j));
            }
        }
        m
    }

    /// Whether the differential at the origin restricted to each graded
    /// block of equal weight is invertible. Only meaningful for subresonant
    /// self-maps.
    pub fn has_invertible_graded_differential(&self) -> bool {
        if self.source != self.target {
            return false;
        }
        let lin = self.linear_part();
        let w = self.source.weights();
        let mut start = 0;
        while start < w.len() {
            let end = (start..w.len()).find(|&i| w[i] != w[start]).unwrap_or(w.len());
            let size = end - start;
            let mut block = QMatrix::zeros(size, size);
            for i in 0..size {
                for j in 0..size {
                    block[(i, j)] = lin[(start + i, start + j)].clone();
                }
            }
            if block.determinant().is_zero() {
                return false;
            }
            start = end;
        }
        true
    }
}

/// Number of distinct positive values of `λ_k − weight(m)` over the
/// strictly subresonant terms of `space`. Composition adds these weights, so
/// any product of more factors than this vanishes modulo the identity.
pub fn nilpotency_bound(space: &WeightedSpace) -> usize {
    let mut levels: Vec<Rational> = Vec::new();
    for lambda in space.distinct_weights() {
        for m in crate::poly::monomials_up_to_weight(space.weights(), &lambda) {
            let gap = &lambda - m.weight(space.weights());
            if gap > Rational::zero() && !levels.contains(&gap) {
                levels.push(gap);
            }
        }
    }
    levels.len() + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    pub(crate) fn space(ws: &[i64]) -> WeightedSpace {
        WeightedSpace::from_weights(ws.iter().map(|&w| rat(w)).collect()).unwrap()
    }

    pub(crate) fn map(space: &WeightedSpace, comps: &[&[(&[u32], Rational)]]) -> PolyMap {
        let n = space.dim();
        let components = comps
            .iter()
            .map(|terms| Poly::from_terms(n, terms.iter().map(|(e, c)| (Monomial(e.to_vec()), c.clone()))))
            .collect();
        PolyMap::new(space.clone(), space.clone(), components).unwrap()
    }

    #[test]
    fn classify_examples() {
        let v = space(&[3, 2, 1]);
        let a = ratio(5, 2);
        let f = map(&v, &[&[(&[1, 0, 0], rat(1)), (&[0, 1, 1], a.clone())], &[(&[0, 1, 0], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        let c = f.classify();
        assert!(c.subresonant && c.resonant && !c.strictly_subresonant);

        let g = map(&v, &[&[(&[1, 0, 0], rat(1)), (&[0, 2, 0], rat(1))], &[(&[0, 1, 0], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        assert_eq!(g.classify().tightest(), MapClass::None);

        let id = PolyMap::identity(&v).classify();
        assert!(id.subresonant && id.resonant && id.strictly_subresonant);
    }

    #[test]
    fn compose_adds_coefficients() {
        let v = space(&[2, 1]);
        let (a, c) = (ratio(3, 7), rat(-2));
        let f = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 2], a.clone())], &[(&[0, 1], rat(1))]]);
        let g = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 2], c.clone())], &[(&[0, 1], rat(1))]]);
        let fg = f.compose(&g).unwrap();
        let want = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 2], a + c)], &[(&[0, 1], rat(1))]]);
        assert_eq!(fg, want);
        assert_eq!(f.compose(&PolyMap::identity(&v)).unwrap(), f);
    }

    #[test]
    fn translations_compose() {
        let v = space(&[3, 2, 1]);
        let u = vec![rat(1), ratio(1, 2), rat(-3)];
        let w = vec![rat(2), rat(0), ratio(7, 3)];
        let sum: Vec<Rational> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let tu = PolyMap::translation(&v, &u).unwrap();
        let tw = PolyMap::translation(&v, &w).unwrap();
        assert_eq!(tu.compose(&tw).unwrap(), PolyMap::translation(&v, &sum).unwrap());
    }

    #[test]
    fn compose_rejects_mismatch_and_bad_class() {
        let v = space(&[2, 1]);
        let w = space(&[3, 2, 1]);
        let bad = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 3], rat(1))], &[(&[0, 1], rat(1))]]);
        assert!(matches!(PolyMap::identity(&w).compose(&PolyMap::identity(&v)), Err(AlgebraError::SpaceMismatch(_))));
        assert!(matches!(bad.compose(&PolyMap::identity(&v)), Err(AlgebraError::ClassViolation(_))));
    }

    #[test]
    fn invert_ssr_examples() {
        let v = space(&[2, 1]);
        let a = ratio(4, 9);
        let f = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 1], a.clone())], &[(&[0, 1], rat(1))]]);
        let inv = f.invert_ssr().unwrap();
        assert_eq!(inv, map(&v, &[&[(&[1, 0], rat(1)), (&[0, 1], -a)], &[(&[0, 1], rat(1))]]));
        assert!(PolyMap::identity(&v).invert_ssr().unwrap().is_identity());

        // x + y z has weight equal to λ_x, so it is resonant rather than strictly subresonant.
        let w = space(&[3, 2, 1]);
        let g = map(&w, &[&[(&[1, 0, 0], rat(1)), (&[0, 1, 1], rat(1))], &[(&[0, 1, 0], rat(1)), (&[0, 0, 2], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        assert!(matches!(g.invert_ssr(), Err(AlgebraError::ClassViolation(_))));

        // Strictly subresonant with a nested correction: x + y + z², y + z + 1, z.
        let h = map(&w, &[&[(&[1, 0, 0], rat(1)), (&[0, 1, 0], rat(1)), (&[0, 0, 2], rat(1))], &[(&[0, 1, 0], rat(1)), (&[0, 0, 1], rat(1)), (&[0, 0, 0], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        let hi = h.invert_ssr().unwrap();
        assert!(h.compose(&hi).unwrap().is_identity());
        assert!(hi.compose(&h).unwrap().is_identity());
    }

    #[test]
    fn differential_examples() {
        let v = space(&[2, 1]);
        let a = ratio(5, 3);
        let f = map(&v, &[&[(&[1, 0], rat(1)), (&[0, 2], a.clone())], &[(&[0, 1], rat(1))]]);
        let d = f.differential_at(&[rat(0), rat(1)]).unwrap();
        assert_eq!(d, QMatrix::from_rows(vec![vec![rat(1), rat(2) * a], vec![rat(0), rat(1)]]));

        let w = space(&[3, 2, 1]);
        let g = map(&w, &[&[(&[1, 0, 0], rat(1)), (&[0, 1, 1], rat(7))], &[(&[0, 1, 0], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        assert_eq!(g.differential_at(&[rat(0), rat(0), rat(0)]).unwrap(), QMatrix::identity(3));
        assert!(g.differential_at(&[rat(0)]).is_err());

        let lin = map(&w, &[&[(&[1, 0, 0], rat(2)), (&[0, 1, 0], rat(3))], &[(&[0, 1, 0], rat(1)), (&[0, 0, 1], rat(4))], &[(&[0, 0, 1], rat(5))]]);
        let p = [ratio(1, 2), rat(7), rat(-1)];
        assert_eq!(lin.differential_at(&p).unwrap(), lin.linear_part());
    }

    #[test]
    fn quotient_examples() {
        let w = space(&[3, 2, 1]);
        let f = map(&w, &[&[(&[1, 0, 0], rat(1)), (&[0, 1, 1], rat(1))], &[(&[0, 1, 0], rat(1)), (&[0, 0, 2], rat(1))], &[(&[0, 0, 1], rat(1))]]);
        let q = f.quotient_map(&rat(3)).unwrap();
        let v = WeightedSpace::new(vec!["y", "z"], vec![rat(2), rat(1)]).unwrap();
        let want = PolyMap::new(
            v.clone(),
            v.clone(),
            vec![
                Poly::from_terms(2, [(Monomial(vec![1, 0]), rat(1)), (Monomial(vec![0, 2]), rat(1))]),
                Poly::var(2, 1),
            ],
        )
        .unwrap();
        assert_eq!(q, want);
        assert!(PolyMap::identity(&w).quotient_map(&rat(3)).unwrap().is_identity());
        let t = PolyMap::translation(&w, &[rat(1), rat(2), rat(3)]).unwrap();
        assert_eq!(t.quotient_map(&rat(2)).unwrap(), {
            let z = WeightedSpace::new(vec!["z"], vec![rat(1)]).unwrap();
            PolyMap::translation(&z, &[rat(3)]).unwrap()
        });
        assert!(matches!(f.quotient_map(&ratio(5, 2)), Err(AlgebraError::NotAWeight(_))));
    }
}
