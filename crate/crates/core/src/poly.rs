//! Sparse multivariate polynomials over a coefficient field.
//!
//! This is the shared representation behind [`crate::sralg::PolyMap`] (exact
//! rational coefficients) and [`crate::nform::Jet`] (rational or `f64`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-7/2"` or a finite decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().ok()?;
        let mag = int_part.abs() * &scale + frac_part;
        let num = if neg { -mag } else { mag };
        return Some(Rational::new(num, scale));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Coefficient field used by polynomials and jets.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_rational(r: &Rational) -> Self;
    fn magnitude(&self) -> f64;
    /// `true` for exact arithmetic, where zero tests are meaningful.
    fn is_exact() -> bool;
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact() -> bool {
        false
    }
}

/// Exponent vector of a monomial. Length equals the number of variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `Σ eᵢ·wᵢ`.
    pub fn weight(&self, weights: &[Rational]) -> Rational {
        self.0
            .iter()
            .zip(weights)
            .filter(|(e, _)| **e > 0)
            .fold(Rational::zero(), |acc, (e, w)| acc + w * rat(*e as i64))
    }

    pub fn eval<C: Scalar>(&self, point: &[C]) -> C {
        let mut acc = C::one();
        for (e, x) in self.0.iter().zip(point) {
            for _ in 0..*e {
                acc = acc * x.clone();
            }
        }
        acc
    }

    /// Index of the unique variable when the monomial is linear.
    pub fn linear_index(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.0.iter().position(|&e| e == 1)
    }
}

/// Sparse polynomial in a fixed number of variables. Stored coefficients are never zero.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_terms(nvars, [(Monomial::var(nvars, i), C::one())])
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let nvars = m.nvars();
        Self::from_terms(nvars, [(m, c)])
    }

    /// Builds a polynomial, summing repeated monomials and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(nvars: usize, terms: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, x)| (m.clone(), x.clone() * c.clone())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Product keeping only monomials of total degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: Option<u32>) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                if max_degree.is_some_and(|d| m.degree() > d) {
                    continue;
                }
                out.add_term(m, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow_truncated(&self, e: u32, max_degree: Option<u32>) -> Self {
        let mut acc = Poly::constant(self.nvars, C::one());
        for _ in 0..e {
            acc = acc.mul_truncated(self, max_degree);
        }
        acc
    }

    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        self.terms
            .iter()
            .fold(C::zero(), |acc, (m, c)| acc + c.clone() * m.eval(point))
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] -= 1;
            out.add_term(Monomial(exps), c.clone() * C::from_rational(&rat(e as i64)));
        }
        out
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes share one arity,
    /// which becomes the arity of the result.
    pub fn compose(&self, subs: &[Poly<C>]) -> Self {
        self.compose_truncated(subs, None)
    }

    pub fn compose_truncated(&self, subs: &[Poly<C>], max_degree: Option<u32>) -> Self {
        assert_eq!(subs.len(), self.nvars, "substitution arity mismatch");
        let out_vars = subs.first().map(Poly::nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Poly<C>>> = subs
            .iter()
            .map(|s| vec![Poly::constant(out_vars, C::one()), s.clone()])
            .collect();
        let mut out = Poly::zero(out_vars);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(out_vars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_truncated(&subs[i], max_degree);
                    powers[i].push(next);
                }
                term = term.mul_truncated(&powers[i][e as usize], max_degree);
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn filter<F: Fn(&Monomial, &C) -> bool>(&self, keep: F) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| keep(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn truncate(&self, max_degree: u32) -> Self {
        self.filter(|m, _| m.degree() <= max_degree)
    }

    /// Homogeneous part of the given total degree.
    pub fn homogeneous(&self, degree: u32) -> Self {
        self.filter(|m, _| m.degree() == degree)
    }

    pub fn map_coeffs<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Poly<D> {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Rewrites exponent vectors through `f`, e.g. to permute or drop variables.
    pub fn remap_monomials<F: Fn(&Monomial) -> Monomial>(&self, nvars: usize, f: F) -> Self {
        Poly::from_terms(nvars, self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(Scalar::magnitude).fold(0.0, f64::max)
    }
}

/// Maximum absolute coefficient difference between two polynomial lists.
pub fn max_coeff_distance<C: Scalar>(a: &[Poly<C>], b: &[Poly<C>]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.sub(q).max_abs_coeff()).fold(0.0, f64::max)
}

/// All exponent vectors of `nvars` variables whose weight is `<= cutoff`,
/// in unspecified order. Every weight must be strictly positive.
pub fn monomials_up_to_weight(weights: &[Rational], cutoff: &Rational) -> Vec<Monomial> {
    fn rec(weights: &[Rational], idx: usize, budget: Rational, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if idx == weights.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        let mut e = 0u32;
        let mut remaining = budget;
        loop {
            cur[idx] = e;
            rec(weights, idx + 1, remaining.clone(), cur, out);
            remaining = remaining - &weights[idx];
            if remaining.is_negative() {
                break;
            }
            e += 1;
        }
        cur[idx] = 0;
    }
    let mut out = Vec::new();
    if cutoff.is_negative() {
        return out;
    }
    let mut cur = vec![0; weights.len()];
    rec(weights, 0, cutoff.clone(), &mut cur, &mut out);
    out
}

/// All exponent vectors of total degree between `min` and `max` inclusive.
pub fn monomials_by_degree(nvars: usize, min: u32, max: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, idx: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if idx + 1 == nvars {
            cur[idx] = left;
            out.push(Monomial(cur.clone()));
            cur[idx] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[idx] = e;
            rec(nvars, idx + 1, left - e, cur, out);
        }
        cur[idx] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if min == 0 {
            out.push(Monomial(vec![]));
        }
        return out;
    }
    let mut cur = vec![0; nvars];
    for d in min..=max {
        rec(nvars, 0, d, &mut cur, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_rational("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational("7"), Some(rat(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(format_rational(&ratio(-6, 4)), "-3/2");
        assert_eq!(format_rational(&rat(5)), "5");
    }

    #[test]
    fn product_weight_is_additive() {
        let w = vec![rat(3), rat(2), rat(1)];
        let a = Monomial(vec![0, 1, 1]);
        let b = Monomial(vec![1, 0, 2]);
        assert_eq!(a.weight(&w), rat(3));
        assert_eq!(a.mul(&b).weight(&w), a.weight(&w) + b.weight(&w));
    }

    #[test]
    fn compose_substitutes() {
        // p(x, y) = x + y^2 with x -> x + y, y -> 2y gives x + y + 4y^2
        let p = Poly::<Rational>::var(2, 0).add(&Poly::var(2, 1).mul(&Poly::var(2, 1)));
        let subs = vec![Poly::var(2, 0).add(&Poly::var(2, 1)), Poly::var(2, 1).scale(&rat(2))];
        let q = p.compose(&subs);
        assert_eq!(q.coeff(&Monomial(vec![0, 2])), rat(4));
        assert_eq!(q.coeff(&Monomial(vec![0, 1])), rat(1));
        assert_eq!(q.len(), 3);
    }

    #[test]
    fn derivative_and_eval() {
        let p = Poly::<f64>::from_terms(2, [(Monomial(vec![2, 1]), 3.0), (Monomial(vec![0, 0]), 1.0)]);
        let dx = p.derivative(0);
        assert_eq!(dx.coeff(&Monomial(vec![1, 1])), 6.0);
        assert_eq!(p.eval(&[2.0, 1.0]), 13.0);
    }

    #[test]
    fn monomial_enumeration_counts() {
        let w = vec![rat(3), rat(2), rat(1)];
        assert_eq!(monomials_up_to_weight(&w, &rat(3)).len(), 7);
        assert_eq!(monomials_by_degree(2, 0, 2).len(), 6);
        assert_eq!(monomials_by_degree(3, 2, 2).len(), 6);
    }
}
