use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::jet::{Coefficient, Jet, JetTerm};
use super::NformError;
use crate::poly::{format_rational, Monomial, Poly, Rational};

fn check_weights(weights: &[Rational], dim: usize) -> Result<(), NformError> {
    if weights.len() != dim {
        return Err(NformError::InvalidWeights(format!("{} weights for dimension {dim}", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(NformError::InvalidWeights(format!("weight {} is not positive", format_rational(w))));
    }
    Ok(())
}

fn subresonant(m: &Monomial, k: usize, weights: &[Rational]) -> bool {
    m.weight(weights) <= weights[k]
}

/// Splits `A = PA + R`: `PA` keeps the terms of component `k` with monomial
/// weight at most `w_k`.
pub fn sr_split<C: Coefficient>(a: &Jet<C>, weights: &[Rational]) -> Result<(Jet<C>, Jet<C>), NformError> {
    check_weights(weights, a.dim())?;
    let (mut pa, mut r) = (Vec::new(), Vec::new());
    for (k, p) in a.components().iter().enumerate() {
        pa.push(p.filter(|m, _| subresonant(m, k, weights)));
        r.push(p.filter(|m, _| !subresonant(m, k, weights)));
    }
    Ok((Jet::new(pa, a.degree())?, Jet::new(r, a.degree())?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    NotConverged,
    Diverged,
}

/// A normalizing coordinate change together with how it was reached.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyResult<C> {
    pub weights: Vec<Rational>,
    pub degree: u32,
    /// `N` with `N⁻¹ ∘ A ∘ N = PA`.
    pub conjugacy: Jet<C>,
    /// The normal form `PA` (for orbits, that of the last step).
    pub normal_form: Jet<C>,
    /// Orbit iterates `N^(n) = (PA^{∘n})⁻¹ ∘ A^{∘n}`; empty for the fixed-point solve.
    pub iterates: Vec<Jet<C>>,
    /// `‖N^(n+1) − N^(n)‖` as the largest coefficient difference.
    pub deviations: Vec<f64>,
    /// Fitted per-step contraction of the deviations.
    pub rate: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub weights: Vec<String>,
    pub degree: u32,
    pub conjugacy: Vec<JetTerm>,
    pub normal_form: Vec<JetTerm>,
    pub iterations: usize,
    pub deviations: Vec<f64>,
    pub rate: Option<f64>,
    pub verdict: Verdict,
}

impl<C: Coefficient> ConjugacyResult<C> {
    pub fn report(&self) -> ConjugacyReport {
        ConjugacyReport {
            weights: self.weights.iter().map(format_rational).collect(),
            degree: self.degree,
            conjugacy: self.conjugacy.terms(),
            normal_form: self.normal_form.terms(),
            iterations: self.iterates.len(),
            deviations: self.deviations.clone(),
            rate: self.rate,
            verdict: self.verdict,
        }
    }
}

/// Least-squares slope of `ln d_n` over the second half of the positive
/// deviations, returned as a per-step factor. All-zero sequences give 0.
pub fn fit_rate(deviations: &[f64]) -> Option<f64> {
    if deviations.is_empty() {
        return None;
    }
    if deviations.iter().all(|&d| d == 0.0) {
        return Some(0.0);
    }
    let pts: Vec<(f64, f64)> = deviations
        .iter()
        .enumerate()
        .skip(deviations.len() / 2)
        .filter(|(_, &d)| d > 0.0 && d.is_finite())
        .map(|(n, &d)| (n as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return if deviations.last().is_some_and(|&d| d == 0.0) { Some(0.0) } else { None };
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

pub(crate) fn verdict(deviations: &[f64], rate: Option<f64>, tol: f64) -> Verdict {
    match (deviations.last(), rate) {
        (None, _) => Verdict::Converged,
        (_, Some(r)) if !(r < 1.0) => Verdict::Diverged,
        (Some(&last), Some(_)) if last < tol => Verdict::Converged,
        _ => Verdict::NotConverged,
    }
}

/// Degree-by-degree Poincaré–Dulac solve at a contracting fixed point.
///
/// With `E = [A∘N − N∘P]_n` from the lower-degree parts, a subresonant slot
/// `(k, m)` goes to `P` and a super-resonant one to `N` with coefficient
/// `−E / (s_k − s^m)`, `s` the diagonal of `DA(0)`. Subresonant slots of `N`
/// stay zero.
pub fn normal_form_fixed_point<C: Coefficient>(a: &Jet<C>, weights: &[Rational], tol: f64) -> Result<ConjugacyResult<C>, NformError> {
    let n = a.dim();
    check_weights(weights, n)?;
    let lin = a.linear_part();
    for (i, row) in lin.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if i != j && !c.is_zero() {
                return Err(NformError::NotDiagonal);
            }
        }
    }
    let s: Vec<C> = (0..n).map(|k| lin[k][k].clone()).collect();
    let sf: Vec<f64> = s.iter().map(Coefficient::value).collect();
    if sf.iter().any(|v| !(v.abs() < 1.0) || *v == 0.0) {
        return Err(NformError::NotContracting);
    }
    let unit = -sf[0].abs().ln() / weights[0].to_f64().unwrap_or(f64::NAN);
    for (k, w) in weights.iter().enumerate() {
        let expected = -unit * w.to_f64().unwrap_or(f64::NAN);
        if (sf[k].abs().ln() - expected).abs() > 1e-6 * expected.abs().max(1.0) {
            return Err(NformError::InvalidWeights(format!(
                "|s_{}| = {} does not match weight {}",
                k + 1,
                sf[k].abs(),
                format_rational(w)
            )));
        }
    }

    let degree = a.degree();
    let mut nn: Vec<Poly<C>> = (0..n).map(|i| Poly::var(n, i)).collect();
    let mut pp: Vec<Poly<C>> = a.components().iter().map(|p| p.truncate(1)).collect();
    for deg in 2..=degree {
        let a_n: Vec<Poly<C>> = a.components().iter().map(|f| f.compose_truncated(&nn, Some(deg))).collect();
        let n_p: Vec<Poly<C>> = nn.iter().map(|f| f.compose_truncated(&pp, Some(deg))).collect();
        for k in 0..n {
            let e = a_n[k].sub(&n_p[k]).homogeneous(deg);
            for (m, c) in e.terms() {
                if subresonant(m, k, weights) {
                    pp[k].add_term(m.clone(), c.clone());
                } else {
                    let sm = m.exps().iter().zip(&s).fold(C::one(), |acc, (&ex, si)| (0..ex).fold(acc, |a2, _| a2 * si.clone()));
                    let div = s[k].clone() - sm;
                    if div.is_zero() || div.magnitude() < tol {
                        return Err(NformError::SmallDivisor {
                            slot: format!("component {} monomial {:?}", k + 1, m.exps()),
                            divisor: div.magnitude(),
                        });
                    }
                    nn[k].add_term(m.clone(), -(c.clone() / div));
                }
            }
        }
    }
    Ok(ConjugacyResult {
        weights: weights.to_vec(),
        degree,
        conjugacy: Jet::new(nn, degree)?,
        normal_form: Jet::new(pp, degree)?,
        iterates: Vec::new(),
        deviations: Vec::new(),
        rate: None,
        verdict: Verdict::Converged,
    })
}

/// Iterates `N^(n) = (PA^{∘n})⁻¹ ∘ A^{∘n}` along an orbit with per-step jets
/// `A_n`, where `PA_n` is the subresonant part of `A_n`. The limit satisfies
/// `N ∘ A = PA ∘ N`, so the reported conjugacy is its inverse.
pub fn normal_form_orbit<C: Coefficient>(jets: &[Jet<C>], weights: &[Rational], tol: f64) -> Result<ConjugacyResult<C>, NformError> {
    let first = jets.first().ok_or_else(|| NformError::Shape("the orbit has no steps".into()))?;
    let dim = first.dim();
    check_weights(weights, dim)?;
    let degree = jets.iter().map(Jet::degree).min().unwrap_or(1);
    let mut a_pow = Jet::identity(dim, degree);
    let mut pa_pow = Jet::identity(dim, degree);
    let mut iterates: Vec<Jet<C>> = Vec::with_capacity(jets.len());
    let mut last_pa = Jet::identity(dim, degree);
    for a in jets {
        let (pa, _) = sr_split(a, weights)?;
        a_pow = a.compose(&a_pow)?;
        pa_pow = pa.compose(&pa_pow)?;
        iterates.push(pa_pow.invert()?.compose(&a_pow)?);
        last_pa = pa;
    }
    let mut deviations = vec![iterates[0].distance(&Jet::identity(dim, degree))];
    deviations.extend(iterates.windows(2).map(|w| w[1].distance(&w[0])));
    let rate = fit_rate(&deviations);
    let verdict = verdict(&deviations, rate, tol);
    let conjugacy = iterates.last().expect("non-empty orbit").invert()?;
    Ok(ConjugacyResult { weights: weights.to_vec(), degree, conjugacy, normal_form: last_pa, iterates, deviations, rate, verdict })
}

/// Smallest `D` with `D·w_min > (w_max − w_min) + margin/unit`, the degree at
/// which the orbit iteration is guaranteed to contract.
pub fn choose_degree(weights: &[Rational], unit: f64, margin: f64) -> u32 {
    let w: Vec<f64> = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
    let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = w.iter().copied().fold(0.0, f64::max);
    let need = (hi - lo) + margin / unit.abs();
    ((need / lo).floor() as u32 + 1).max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn xy() -> (Poly<Rational>, Poly<Rational>) {
        (Poly::var(2, 0), Poly::var(2, 1))
    }

    fn example(degree: u32) -> Jet<Rational> {
        let (x, y) = xy();
        let x2 = x.mul(&x);
        Jet::new(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x2).add(&x2.mul(&x))], degree).unwrap()
    }

    #[test]
    fn split_example() {
        let (x, y) = xy();
        let (a, b, c) = (rat(3), rat(5), rat(7));
        let x2 = x.mul(&x);
        let jet = Jet::new(
            vec![x.scale(&ratio(1, 2)).add(&y.scale(&a)), y.scale(&ratio(1, 4)).add(&x2.scale(&b)).add(&x2.mul(&x).scale(&c))],
            3,
        )
        .unwrap();
        let (pa, r) = sr_split(&jet, &[rat(1), rat(2)]).unwrap();
        assert_eq!(pa.components()[0], x.scale(&ratio(1, 2)));
        assert_eq!(pa.components()[1], y.scale(&ratio(1, 4)).add(&x2.scale(&b)));
        assert_eq!(r.components()[0], y.scale(&a));
        assert_eq!(r.components()[1], x2.mul(&x).scale(&c));
        assert_eq!(pa.add(&r), jet);
        let (pa2, r2) = sr_split(&pa, &[rat(1), rat(2)]).unwrap();
        assert_eq!(pa2, pa);
        assert!(r2.is_zero());
    }

    #[test]
    fn fixed_point_example() {
        let res = normal_form_fixed_point(&example(4), &[rat(1), rat(2)], 1e-9).unwrap();
        let (x, y) = xy();
        let x2 = x.mul(&x);
        assert_eq!(res.conjugacy.components(), &[x.clone(), y.sub(&x2.mul(&x).scale(&rat(8)))]);
        assert_eq!(res.normal_form.components(), &[x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x2)]);
        let check = res.conjugacy.invert().unwrap().compose(&example(4).compose(&res.conjugacy).unwrap()).unwrap();
        assert_eq!(check, res.normal_form);
    }

    #[test]
    fn linear_map_needs_no_change() {
        let j = Jet::linear(&[vec![ratio(1, 2), rat(0)], vec![rat(0), ratio(1, 4)]], 4).unwrap();
        assert!(normal_form_fixed_point(&j, &[rat(1), rat(2)], 1e-9).unwrap().conjugacy.is_identity());
    }

    #[test]
    fn orbit_of_subresonant_jet_is_identity() {
        let (x, y) = xy();
        let j = Jet::new(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x.mul(&x))], 3).unwrap();
        let res = normal_form_orbit(&vec![j; 10], &[rat(1), rat(2)], 1e-9).unwrap();
        assert!(res.iterates.iter().all(Jet::is_identity));
        assert_eq!(res.verdict, Verdict::Converged);
    }

    #[test]
    fn orbit_limit_matches_fixed_point() {
        let fp = normal_form_fixed_point(&example(4), &[rat(1), rat(2)], 1e-9).unwrap();
        let res = normal_form_orbit(&vec![example(4); 60], &[rat(1), rat(2)], 1e-12).unwrap();
        assert!(res.conjugacy.distance(&fp.conjugacy) < 1e-12);
        assert_eq!(res.verdict, Verdict::Converged);
        assert!((res.rate.unwrap() - 0.5).abs() < 1e-6, "{:?}", res.rate);
    }

    #[test]
    fn misdeclared_weights_diverge() {
        let (x, y) = xy();
        let j = Jet::new(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x.mul(&x))], 3).unwrap();
        let res = normal_form_orbit(&vec![j; 30], &[rat(1), ratio(3, 2)], 1e-9).unwrap();
        assert_eq!(res.verdict, Verdict::Diverged);
    }

    #[test]
    fn resonance_hidden_by_weights() {
        let (x, y) = xy();
        let j = Jet::new(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x.mul(&x))], 3).unwrap();
        // inconsistent with the linear part
        assert!(matches!(normal_form_fixed_point(&j, &[rat(1), ratio(3, 2)], 1e-9), Err(NformError::InvalidWeights(_))));
        // consistent to 1e-6 but x² is declared super-resonant: s_y − s_x² = 0
        let w = [rat(1), rat(2) - ratio(1, 100_000_000)];
        assert!(matches!(normal_form_fixed_point(&j, &w, 1e-9), Err(NformError::SmallDivisor { .. })));
    }
}
