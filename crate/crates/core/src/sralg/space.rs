use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::AlgebraError;
use crate::poly::{format_rational, parse_rational, Monomial, Rational};

/// A filtered vector space given by coordinate functions with positive weights.
///
/// The i-th coordinate function has weight `λᵢ > 0`; the matching vector
/// direction sits in filtration level `−λᵢ`. Weights are listed in
/// non-increasing order and repeated weights encode multiplicity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedSpace {
    coords: Vec<String>,
    weights: Vec<Rational>,
}

impl WeightedSpace {
    pub fn new<S: Into<String>>(coords: Vec<S>, weights: Vec<Rational>) -> Result<Self, AlgebraError> {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        if coords.is_empty() {
            return Err(AlgebraError::InvalidSpace("at least one coordinate is required".into()));
        }
        if coords.len() != weights.len() {
            return Err(AlgebraError::InvalidSpace(format!(
                "{} coordinates but {} weights",
                coords.len(),
                weights.len()
            )));
        }
        for (c, w) in coords.iter().zip(&weights) {
            if !w.is_positive() {
                return Err(AlgebraError::InvalidSpace(format!(
                    "weight of `{c}` must be strictly positive, got {}",
                    format_rational(w)
                )));
            }
        }
        if weights.windows(2).any(|p| p[0] < p[1]) {
            return Err(AlgebraError::InvalidSpace("weights must be listed in non-increasing order".into()));
        }
        for (i, c) in coords.iter().enumerate() {
            let valid = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
                && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !valid {
                return Err(AlgebraError::InvalidSpace(format!("coordinate name `{c}` is not an identifier")));
            }
            if coords[..i].contains(c) {
                return Err(AlgebraError::InvalidSpace(format!("duplicate coordinate `{c}`")));
            }
        }
        Ok(WeightedSpace { coords, weights })
    }

    /// Space with generated coordinate names: `x, y, z, w` for up to four
    /// coordinates, `x1, x2, …` beyond that.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self, AlgebraError> {
        let n = weights.len();
        let names: Vec<String> = if n <= 4 {
            ["x", "y", "z", "w"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|i| format!("x{i}")).collect()
        };
        Self::new(names, weights)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    /// Largest weight `λ₁`.
    pub fn top_weight(&self) -> &Rational {
        &self.weights[0]
    }

    /// Distinct weights, largest first.
    pub fn distinct_weights(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        for w in &self.weights {
            if out.last() != Some(w) {
                out.push(w.clone());
            }
        }
        out
    }

    pub fn index_of(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    /// Coordinates whose weight is strictly below `lambda`, i.e. the
    /// coordinates that survive in `V / V^{≤−λ}`.
    pub fn quotient(&self, lambda: &Rational) -> Result<(WeightedSpace, Vec<usize>), AlgebraError> {
        let kept: Vec<usize> = (0..self.dim()).filter(|&i| &self.weights[i] < lambda).collect();
        if kept.is_empty() {
            return Err(AlgebraError::EmptyQuotient(format_rational(lambda)));
        }
        let space = WeightedSpace {
            coords: kept.iter().map(|&i| self.coords[i].clone()).collect(),
            weights: kept.iter().map(|&i| self.weights[i].clone()).collect(),
        };
        Ok((space, kept))
    }

    pub fn check_point<T>(&self, p: &[T]) -> Result<(), AlgebraError> {
        if p.len() != self.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }
}

impl fmt::Display for WeightedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.coords.iter().zip(&self.weights).map(|(c, w)| format!("{c}:{}", format_rational(w))).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// `Σ eᵢ·λᵢ` for a monomial over `space`.
pub fn monomial_weight(m: &Monomial, space: &WeightedSpace) -> Result<Rational, AlgebraError> {
    space.check_point(m.exps())?;
    Ok(m.weight(space.weights()))
}

/// Serialized form of a [`WeightedSpace`]; weights are rational strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceSpec {
    pub coords: Vec<String>,
    pub weights: Vec<String>,
}

impl From<&WeightedSpace> for SpaceSpec {
    fn from(s: &WeightedSpace) -> Self {
        SpaceSpec { coords: s.coords.clone(), weights: s.weights.iter().map(format_rational).collect() }
    }
}

impl TryFrom<&SpaceSpec> for WeightedSpace {
    type Error = AlgebraError;
    fn try_from(s: &SpaceSpec) -> Result<Self, AlgebraError> {
        let weights = s
            .weights
            .iter()
            .map(|w| parse_rational(w).ok_or_else(|| AlgebraError::Parse(format!("bad weight `{w}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        WeightedSpace::new(s.coords.clone(), weights)
    }
}
