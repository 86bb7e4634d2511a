//! Linearization of subresonant maps.
//!
//! `P_V` is the space of polynomial functions of weight at most the cutoff
//! (constants included) and `L_V` its dual. The evaluation map
//! `ev: V → L_V` sends a point to the values of the basis monomials, and a
//! subresonant map `F` acts on `L_V` by the matrix whose row for a basis
//! monomial `b` holds the coefficients of the pullback `b ∘ F`. With this
//! convention `ev(F(v)) = ρ(F)·ev(v)` and `ρ(F∘G) = ρ(F)·ρ(G)`.
//!
//! Bases are listed by increasing weight, so pullback (which never raises
//! weight) makes every matrix block lower-triangular in this order.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::QMatrix;
use crate::poly::{format_rational, monomials_up_to_weight, Monomial, Poly, Rational};
use crate::sralg::{canonical_cmp, AlgebraError, PolyMap, SpaceSpec, WeightedSpace};

/// Weight-sorted monomial basis of `P_V`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinBasis {
    space: WeightedSpace,
    cutoff: Rational,
    monomials: Vec<Monomial>,
    weights: Vec<Rational>,
    index: HashMap<Monomial, usize>,
}

impl LinBasis {
    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn cutoff(&self) -> &Rational {
        &self.cutoff
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Position of the coordinate function `x_k`.
    pub fn coordinate_index(&self, k: usize) -> usize {
        self.index[&Monomial::var(self.space.dim(), k)]
    }

    /// Row vector of a polynomial in this basis.
    pub fn coefficients(&self, p: &Poly<Rational>) -> Result<Vec<Rational>, AlgebraError> {
        let mut row = vec![Rational::zero(); self.len()];
        for (m, c) in p.terms() {
            let i = self.index_of(m).ok_or_else(|| {
                AlgebraError::ClassViolation(format!(
                    "monomial {:?} of weight {} exceeds the basis cutoff {}",
                    m.exps(),
                    format_rational(&m.weight(self.space.weights())),
                    format_rational(&self.cutoff)
                ))
            })?;
            row[i] = c.clone();
        }
        Ok(row)
    }

    pub fn polynomial(&self, row: &[Rational]) -> Poly<Rational> {
        Poly::from_terms(
            self.space.dim(),
            self.monomials.iter().zip(row).map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}

/// All monomials of weight `<= cutoff`, sorted by (weight, lex).
pub fn enumerate_basis(space: &WeightedSpace, cutoff: &Rational) -> Result<LinBasis, AlgebraError> {
    if cutoff < space.top_weight() {
        return Err(AlgebraError::ClassViolation(format!(
            "cutoff {} is below the top weight {}",
            format_rational(cutoff),
            format_rational(space.top_weight())
        )));
    }
    let mut monomials = monomials_up_to_weight(space.weights(), cutoff);
    monomials.sort_by(|a, b| canonical_cmp(a, b, space.weights()));
    let weights = monomials.iter().map(|m| m.weight(space.weights())).collect();
    let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    Ok(LinBasis { space: space.clone(), cutoff: cutoff.clone(), monomials, weights, index })
}

/// Basis with the default cutoff `λ₁`.
pub fn default_basis(space: &WeightedSpace) -> LinBasis {
    enumerate_basis(space, space.top_weight()).expect("top weight is a valid cutoff")
}

/// `ev(v)`: every basis monomial evaluated at `v`.
pub fn ev(v: &[Rational], basis: &LinBasis) -> Result<Vec<Rational>, AlgebraError> {
    basis.space.check_point(v)?;
    Ok(basis.monomials.iter().map(|m| m.eval(v)).collect())
}

/// Matrix representation of a subresonant map on the linearized spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LinRep {
    pub basis_src: LinBasis,
    pub basis_tgt: LinBasis,
    pub matrix: QMatrix,
}

impl LinRep {
    /// Entries coupling a row of lower weight to a column of strictly higher weight.
    pub fn filtration_violations(&self) -> Vec<(usize, usize)> {
        filtration_violations(&self.matrix, &self.basis_tgt, &self.basis_src)
    }

    pub fn to_spec(&self) -> LinRepSpec {
        let basis = |b: &LinBasis| BasisSpec {
            space: b.space().into(),
            cutoff: format_rational(b.cutoff()),
            monomials: b.monomials.iter().map(|m| m.0.clone()).collect(),
            weights: b.weights.iter().map(format_rational).collect(),
        };
        LinRepSpec {
            basis_src: basis(&self.basis_src),
            basis_tgt: basis(&self.basis_tgt),
            matrix: (0..self.matrix.nrows())
                .map(|i| self.matrix.row(i).iter().map(format_rational).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisSpec {
    pub space: SpaceSpec,
    pub cutoff: String,
    pub monomials: Vec<Vec<u32>>,
    pub weights: Vec<String>,
}

/// Self-describing dense export of a [`LinRep`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LinRepSpec {
    pub basis_src: BasisSpec,
    pub basis_tgt: BasisSpec,
    pub matrix: Vec<Vec<String>>,
}

fn filtration_violations(m: &QMatrix, rows: &LinBasis, cols: &LinBasis) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_zero() && cols.weight(j) > rows.weight(i) {
                out.push((i, j));
            }
        }
    }
    out
}

/// `ρ(F)`: rows indexed by target monomials, columns by source monomials.
pub fn linearize(f: &PolyMap) -> Result<LinRep, AlgebraError> {
    if !f.is_subresonant() {
        return Err(AlgebraError::ClassViolation("only subresonant maps can be linearized".into()));
    }
    let basis_tgt = default_basis(f.target());
    let cutoff = std::cmp::max(f.source().top_weight(), f.target().top_weight()).clone();
    let basis_src = enumerate_basis(f.source(), &cutoff)?;
    let matrix = pullback_matrix(f.components(), &basis_tgt, &basis_src)?;
    Ok(LinRep { basis_src, basis_tgt, matrix })
}

/// Matrix whose row `b` holds the coefficients of `b ∘ F`.
fn pullback_matrix(components: &[Poly<Rational>], rows: &LinBasis, cols: &LinBasis) -> Result<QMatrix, AlgebraError> {
    let n_src = cols.space.dim();
    let mut m = QMatrix::zeros(rows.len(), cols.len());
    // Powers of each component, built lazily.
    let mut powers: Vec<Vec<Poly<Rational>>> = components
        .iter()
        .map(|c| vec![Poly::constant(n_src, Rational::one()), c.clone()])
        .collect();
    for (i, b) in rows.monomials.iter().enumerate() {
        let mut pulled = Poly::constant(n_src, Rational::one());
        for (k, &e) in b.exps().iter().enumerate() {
            while powers[k].len() <= e as usize {
                let next = powers[k].last().unwrap().mul(&components[k]);
                powers[k].push(next);
            }
            if e > 0 {
                pulled = pulled.mul(&powers[k][e as usize]);
            }
        }
        let row = cols.coefficients(&pulled)?;
        for (j, c) in row.into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    Ok(m)
}

/// The subresonant self-map of `basis.space()` whose linearization is `g`.
pub fn delinearize(g: &QMatrix, basis: &LinBasis) -> Result<PolyMap, AlgebraError> {
    if g.nrows() != basis.len() || g.ncols() != basis.len() {
        return Err(AlgebraError::DimensionMismatch { expected: basis.len(), found: g.nrows() });
    }
    if let Some((i, j)) = filtration_violations(g, basis, basis).first() {
        return Err(AlgebraError::NotPolynomial(format!(
            "entry ({i}, {j}) raises weight from {} to {}",
            format_rational(basis.weight(*i)),
            format_rational(basis.weight(*j))
        )));
    }
    let space = basis.space.clone();
    let components =
        (0..space.dim()).map(|k| basis.polynomial(g.row(basis.coordinate_index(k)))).collect();
    let f = PolyMap::new(space.clone(), space, components)?;
    let back = pullback_matrix(f.components(), basis, basis)?;
    if &back != g {
        return Err(AlgebraError::NotPolynomial("matrix does not preserve the evaluation image".into()));
    }
    Ok(f)
}

/// Inverse of an invertible subresonant self-map, through `ρ(F)⁻¹`.
pub fn invert_sr(f: &PolyMap) -> Result<PolyMap, AlgebraError> {
    if f.source() != f.target() {
        return Err(AlgebraError::SpaceMismatch("inverse requires a self-map".into()));
    }
    if !f.is_subresonant() {
        return Err(AlgebraError::ClassViolation("map is not subresonant".into()));
    }
    if !f.has_invertible_graded_differential() {
        return Err(AlgebraError::SingularDifferential);
    }
    let rep = linearize(f)?;
    let inv = rep.matrix.inverse().ok_or(AlgebraError::SingularDifferential)?;
    delinearize(&inv, &rep.basis_src)
}

/// `F = S ∘ R` with `R` resonant and `S` strictly subresonant.
pub fn sr_decompose(f: &PolyMap) -> Result<(PolyMap, PolyMap), AlgebraError> {
    if f.source() != f.target() {
        return Err(AlgebraError::SpaceMismatch("decomposition requires a self-map".into()));
    }
    if !f.is_subresonant() {
        return Err(AlgebraError::ClassViolation("map is not subresonant".into()));
    }
    if !f.has_invertible_graded_differential() {
        return Err(AlgebraError::SingularDifferential);
    }
    let r = f.resonant_part();
    let s = f.compose(&invert_sr(&r)?)?;
    debug_assert!(s.is_strictly_subresonant());
    Ok((r, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn space(ws: &[i64]) -> WeightedSpace {
        WeightedSpace::from_weights(ws.iter().map(|&w| rat(w)).collect()).unwrap()
    }

    fn from_text(v: &WeightedSpace, t: &str) -> PolyMap {
        PolyMap::from_text(t, v, v).unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = enumerate_basis(&space(&[3, 2, 1]), &rat(3)).unwrap();
        let want: Vec<Vec<u32>> =
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 0, 2], vec![0, 1, 0], vec![0, 0, 3], vec![0, 1, 1], vec![1, 0, 0]];
        assert_eq!(b.monomials().iter().map(|m| m.0.clone()).collect::<Vec<_>>(), want);
        assert_eq!(enumerate_basis(&space(&[1]), &rat(1)).unwrap().len(), 2);
        let b21 = enumerate_basis(&space(&[2, 1]), &rat(2)).unwrap();
        assert_eq!(b21.monomials().iter().map(|m| m.0.clone()).collect::<Vec<_>>(), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0]]);
        assert!(enumerate_basis(&space(&[2, 1]), &ratio(3, 2)).is_err());
    }

    #[test]
    fn ev_examples() {
        let b = default_basis(&space(&[2, 1]));
        assert_eq!(ev(&[rat(5), rat(2)], &b).unwrap(), vec![rat(1), rat(2), rat(4), rat(5)]);
        assert_eq!(ev(&[rat(0), rat(0)], &b).unwrap(), vec![rat(1), rat(0), rat(0), rat(0)]);
        assert_ne!(ev(&[rat(1), rat(0)], &b).unwrap(), ev(&[rat(0), rat(1)], &b).unwrap());
        assert!(ev(&[rat(1)], &b).is_err());
    }

    #[test]
    fn linearize_examples() {
        let v = space(&[2, 1]);
        let f = from_text(&v, "x <- 1 * x^1 ; x <- 1 * y^2 ; y <- 1 * y^1");
        let rep = linearize(&f).unwrap();
        let x_row = rep.basis_tgt.coordinate_index(0);
        assert_eq!(rep.matrix.row(x_row), &[rat(0), rat(0), rat(1), rat(1)]);
        assert_eq!(linearize(&PolyMap::identity(&v)).unwrap().matrix, QMatrix::identity(4));
        let bad = from_text(&v, "x <- 1 * y^3 ; y <- 1 * y^1");
        assert!(linearize(&bad).is_err());
    }

    #[test]
    fn diagonal_blocks_are_tensor_powers() {
        // F = (p x + a yz + b y + c z, q y + d z², r z) over weights (3,2,1).
        let v = space(&[3, 2, 1]);
        let (p, q, r) = (rat(2), rat(3), rat(5));
        let f = from_text(
            &v,
            "x <- 2 * x^1 ; x <- 7 * y^1 z^1 ; x <- 1 * y^1 ; x <- 4 * z^1 ; y <- 3 * y^1 ; y <- 6 * z^2 ; z <- 5 * z^1",
        );
        let rep = linearize(&f).unwrap();
        let b = &rep.basis_src;
        let diag = |e: &[u32]| {
            let i = b.index_of(&Monomial(e.to_vec())).unwrap();
            rep.matrix[(i, i)].clone()
        };
        assert_eq!(diag(&[1, 0, 0]), p);
        assert_eq!(diag(&[0, 1, 1]), &q * &r);
        assert_eq!(diag(&[0, 1, 0]), q);
        assert_eq!(diag(&[0, 0, 3]), &r * &r * &r);
        assert_eq!(diag(&[0, 0, 1]), r);
        assert!(rep.filtration_violations().is_empty());
    }

    #[test]
    fn delinearize_examples() {
        let v = space(&[3, 2, 1]);
        let b = default_basis(&v);
        assert!(delinearize(&QMatrix::identity(b.len()), &b).unwrap().is_identity());
        let f = from_text(&v, "x <- 1 * x^1 ; x <- 2/3 * y^1 z^1 ; y <- -1 * y^1 ; y <- 1 * z^2 ; y <- 4 ; z <- 1/2 * z^1");
        assert_eq!(delinearize(&linearize(&f).unwrap().matrix, &b).unwrap(), f);

        let mut scaled = QMatrix::identity(b.len());
        scaled[(0, 0)] = rat(2);
        assert!(matches!(delinearize(&scaled, &b), Err(AlgebraError::NotPolynomial(_))));

        let mut raising = QMatrix::identity(b.len());
        raising[(1, 6)] = rat(1);
        assert!(matches!(delinearize(&raising, &b), Err(AlgebraError::NotPolynomial(_))));
    }

    #[test]
    fn resonant_inverse_example() {
        let v = space(&[3, 2, 1]);
        let f = from_text(&v, "x <- 1 * x^1 ; x <- 1 * y^1 z^1 ; y <- 1 * y^1 ; y <- 1 * z^2 ; z <- 1 * z^1");
        let want = from_text(&v, "x <- 1 * x^1 ; x <- -1 * y^1 z^1 ; x <- 1 * z^3 ; y <- 1 * y^1 ; y <- -1 * z^2 ; z <- 1 * z^1");
        let inv = invert_sr(&f).unwrap();
        assert_eq!(inv, want);
        assert!(f.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn decompose_examples() {
        let v = space(&[2, 1]);
        let f = from_text(&v, "x <- 2 * x^1 ; x <- 3 * y^2 ; y <- 5 * y^1");
        let (r, s) = sr_decompose(&f).unwrap();
        assert_eq!(r, f);
        assert!(s.is_identity());

        let ssr = from_text(&v, "x <- 1 * x^1 ; x <- 3 * y^1 ; x <- 1 ; y <- 1 * y^1 ; y <- -2");
        let (r, s) = sr_decompose(&ssr).unwrap();
        assert!(r.is_identity());
        assert_eq!(s, ssr);

        let mixed = from_text(&v, "x <- 2 * x^1 ; x <- 3 * y^2 ; x <- 7 * y^1 ; x <- 1 ; y <- 5 * y^1 ; y <- 1/2");
        let (r, s) = sr_decompose(&mixed).unwrap();
        assert!(r.classify().resonant);
        assert!(s.is_strictly_subresonant());
        assert_eq!(s.compose(&r).unwrap(), mixed);

        let singular = from_text(&v, "x <- 1 * y^2 ; y <- 5 * y^1");
        assert!(matches!(sr_decompose(&singular), Err(AlgebraError::SingularDifferential)));
    }
}
