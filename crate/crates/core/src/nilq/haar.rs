use num_traits::{One, Signed, Zero};

use super::{NilqError, Subalgebra, TransversalChart};
use crate::linz::default_basis;
use crate::matrix::Matrix;
use crate::poly::{format_rational, Poly, Rational};

/// Haar volume of a box `Π [loᵢ, hiᵢ]` in exponential coordinates of `𝔲⁺`.
pub fn haar_volume(sub: &Subalgebra, bounds: &[(Rational, Rational)]) -> Result<Rational, NilqError> {
    if bounds.len() != sub.dim() {
        return Err(NilqError::DimensionMismatch { expected: sub.dim(), found: bounds.len() });
    }
    let mut vol = Rational::one();
    for (lo, hi) in bounds {
        if hi <= lo {
            return Err(NilqError::DegenerateBox(format!("[{}, {}]", format_rational(lo), format_rational(hi))));
        }
        vol *= hi - lo;
    }
    Ok(vol)
}

/// Left translation `u ↦ log(exp u₀ ∘ exp u)` written in the exponential
/// coordinates of `𝔲⁺`, one polynomial per coordinate.
pub fn left_translation(sub: &Subalgebra, u0: &[Rational]) -> Result<Vec<Poly<Rational>>, NilqError> {
    let alg = sub.algebra();
    let d = sub.dim();
    let basis = default_basis(alg.space());
    let zero = Poly::zero(d);
    let mut sym = Matrix::zeros_like(basis.len(), basis.len(), &zero);
    for i in 0..d {
        let m = sub.basis_field(i).derivation_matrix(&basis);
        let var = Poly::var(d, i);
        for r in 0..basis.len() {
            for c in 0..basis.len() {
                if !m[(r, c)].is_zero() {
                    sym[(r, c)] = sym[(r, c)].add(&var.scale(&m[(r, c)]));
                }
            }
        }
    }
    let m0 = sub.element(u0)?.derivation_matrix(&basis);
    let mut fixed = Matrix::zeros_like(basis.len(), basis.len(), &zero);
    for r in 0..basis.len() {
        for c in 0..basis.len() {
            fixed[(r, c)] = Poly::constant(d, m0[(r, c)].clone());
        }
    }
    let exp = |m: &Matrix<Poly<Rational>>| m.nilpotent_exp().expect("ssr derivations are nilpotent");
    let log = exp(&fixed).mul(&exp(&sym)).unipotent_log().expect("unipotent");
    let ncoords: Vec<Poly<Rational>> = (0..alg.dim())
        .map(|i| {
            let (k, m) = alg.element(i);
            log[(basis.coordinate_index(k), basis.index_of(m).expect("monomial in basis"))].clone()
        })
        .collect();
    // Express the result in the 𝔲⁺ basis through the default splitting.
    let chart = TransversalChart::orthogonal(sub);
    let split = |j: usize| {
        ncoords.iter().enumerate().fold(Poly::zero(d), |acc, (i, p)| {
            let c = chart_split_entry(&chart, i, j);
            if c.is_zero() {
                acc
            } else {
                acc.add(&p.scale(&c))
            }
        })
    };
    let vd = chart.v_dim();
    if (0..vd).any(|j| !split(j).is_zero()) {
        return Err(NilqError::InvalidSubalgebra("translation leaves the subalgebra".into()));
    }
    Ok((0..d).map(|j| split(vd + j)).collect())
}

fn chart_split_entry(chart: &TransversalChart, i: usize, j: usize) -> Rational {
    let mut e = vec![Rational::zero(); chart.algebra().dim()];
    e[i] = Rational::one();
    let field = chart.algebra().field(&e).expect("unit vector lies in 𝔫");
    let (v, u) = chart.split(&field).expect("same algebra");
    if j < v.len() {
        v[j].clone()
    } else {
        u[j - v.len()].clone()
    }
}

/// Jacobian determinant of left translation by `exp u₀`, as a polynomial.
pub fn left_translation_jacobian(sub: &Subalgebra, u0: &[Rational]) -> Result<Poly<Rational>, NilqError> {
    let t = left_translation(sub, u0)?;
    let d = sub.dim();
    let jac: Vec<Vec<Poly<Rational>>> = t.iter().map(|p| (0..d).map(|j| p.derivative(j)).collect()).collect();
    Ok(determinant(&jac, d))
}

/// Haar volume of the left translate `exp u₀ · box`.
pub fn haar_pushforward(sub: &Subalgebra, bounds: &[(Rational, Rational)], u0: &[Rational]) -> Result<Rational, NilqError> {
    let vol = haar_volume(sub, bounds)?;
    let det = left_translation_jacobian(sub, u0)?;
    if det.degree().unwrap_or(0) > 0 {
        return Err(NilqError::InvalidSubalgebra("left translation has a non-constant Jacobian".into()));
    }
    let c = det.coeff(&crate::poly::Monomial::one(sub.dim()));
    Ok(vol * c.abs())
}

/// Laplace expansion along rows, memoised over column subsets.
fn determinant(m: &[Vec<Poly<Rational>>], nvars: usize) -> Poly<Rational> {
    let n = m.len();
    if n == 0 {
        return Poly::constant(nvars, Rational::one());
    }
    let mut memo: Vec<Option<Poly<Rational>>> = vec![None; 1 << n];
    memo[0] = Some(Poly::constant(nvars, Rational::one()));
    fn go(m: &[Vec<Poly<Rational>>], cols: usize, memo: &mut Vec<Option<Poly<Rational>>>, nvars: usize) -> Poly<Rational> {
        if let Some(p) = &memo[cols] {
            return p.clone();
        }
        let n = m.len();
        let row = n - cols.count_ones() as usize;
        let mut acc = Poly::zero(nvars);
        let mut sign_pos = 0;
        for c in 0..n {
            if cols & (1 << c) == 0 {
                continue;
            }
            if !m[row][c].is_zero() {
                let minor = go(m, cols & !(1 << c), memo, nvars);
                let term = m[row][c].mul(&minor);
                acc = if sign_pos % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            sign_pos += 1;
        }
        memo[cols] = Some(acc.clone());
        acc
    }
    go(m, (1 << n) - 1, &mut memo, nvars)
}
