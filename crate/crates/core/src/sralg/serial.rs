//! Canonical text and structured (JSON) forms of [`PolyMap`].
//!
//! Text form: terms separated by `" ; "`, each written as
//! `component <- coeff` followed by ` * x^e y^e …` when non-constant.
//! Components follow target order, and terms within a component follow the
//! canonical monomial order (weight, then lexicographic exponents).
//! Exponent-zero factors are omitted; every written factor carries `^e`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{AlgebraError, PolyMap, SpaceSpec, WeightedSpace};
use crate::poly::{format_rational, parse_rational, Monomial, Poly, Rational};

/// Total order on monomials used for every canonical listing.
pub fn canonical_cmp(a: &Monomial, b: &Monomial, weights: &[Rational]) -> Ordering {
    a.weight(weights).cmp(&b.weight(weights)).then_with(|| a.cmp(b))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermSpec {
    pub component: String,
    pub exps: Vec<u32>,
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyMapSpec {
    pub source: SpaceSpec,
    pub target: SpaceSpec,
    pub terms: Vec<TermSpec>,
}

impl PolyMap {
    fn sorted_terms(&self) -> Vec<(usize, Monomial, Rational)> {
        let w = self.source().weights();
        let mut out = Vec::new();
        for (k, comp) in self.components().iter().enumerate() {
            let mut terms: Vec<(Monomial, Rational)> = comp.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
            terms.sort_by(|a, b| canonical_cmp(&a.0, &b.0, w));
            out.extend(terms.into_iter().map(|(m, c)| (k, m, c)));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let names = self.source().coords();
        self.sorted_terms()
            .into_iter()
            .map(|(k, m, c)| {
                let mut s = format!("{} <- {}", self.target().coords()[k], format_rational(&c));
                let factors: Vec<String> = m
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, e)| format!("{}^{}", names[i], e))
                    .collect();
                if !factors.is_empty() {
                    s.push_str(" * ");
                    s.push_str(&factors.join(" "));
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" ; ")
    }

    pub fn from_text(text: &str, source: &WeightedSpace, target: &WeightedSpace) -> Result<PolyMap, AlgebraError> {
        let n = source.dim();
        let mut comps = vec![Poly::zero(n); target.dim()];
        for raw in text.split(';') {
            let term = raw.trim();
            if term.is_empty() {
                continue;
            }
            let (lhs, rhs) = term
                .split_once("<-")
                .ok_or_else(|| AlgebraError::Parse(format!("missing `<-` in `{term}`")))?;
            let k = target
                .index_of(lhs.trim())
                .ok_or_else(|| AlgebraError::Parse(format!("unknown target coordinate `{}`", lhs.trim())))?;
            let (coeff, factors) = match rhs.split_once('*') {
                Some((c, f)) => (c.trim(), f.trim()),
                None => (rhs.trim(), ""),
            };
            let c = parse_rational(coeff).ok_or_else(|| AlgebraError::Parse(format!("bad coefficient `{coeff}`")))?;
            let mut exps = vec![0u32; n];
            for factor in factors.split_whitespace() {
                let (var, e) = factor.split_once('^').unwrap_or((factor, "1"));
                let i = source
                    .index_of(var)
                    .ok_or_else(|| AlgebraError::Parse(format!("unknown source coordinate `{var}`")))?;
                let e: u32 = e.parse().map_err(|_| AlgebraError::Parse(format!("bad exponent in `{factor}`")))?;
                exps[i] += e;
            }
            comps[k].add_term(Monomial(exps), c);
        }
        PolyMap::new(source.clone(), target.clone(), comps)
    }

    pub fn to_spec(&self) -> PolyMapSpec {
        PolyMapSpec {
            source: self.source().into(),
            target: self.target().into(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(k, m, c)| TermSpec {
                    component: self.target().coords()[k].clone(),
                    exps: m.0,
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: &PolyMapSpec) -> Result<PolyMap, AlgebraError> {
        let source = WeightedSpace::try_from(&spec.source)?;
        let target = WeightedSpace::try_from(&spec.target)?;
        let n = source.dim();
        let mut comps = vec![Poly::zero(n); target.dim()];
        for t in &spec.terms {
            let k = target
                .index_of(&t.component)
                .ok_or_else(|| AlgebraError::Parse(format!("unknown component `{}`", t.component)))?;
            if t.exps.len() != n {
                return Err(AlgebraError::DimensionMismatch { expected: n, found: t.exps.len() });
            }
            let c = parse_rational(&format!("{}/{}", t.num, t.den))
                .ok_or_else(|| AlgebraError::Parse(format!("bad coefficient {}/{}", t.num, t.den)))?;
            comps[k].add_term(Monomial(t.exps.clone()), c);
        }
        PolyMap::new(source, target, comps)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("PolyMap spec serializes")
    }

    pub fn from_json(s: &str) -> Result<PolyMap, AlgebraError> {
        let spec: PolyMapSpec = serde_json::from_str(s).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        Self::from_spec(&spec)
    }
}
