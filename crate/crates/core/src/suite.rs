//! Randomized exact-law batteries over sralg, linz and nilq.
//!
//! Every law is checked with exact rational arithmetic. The composition
//! routine is a parameter so that a deliberately broken implementation can be
//! plugged in to exercise the counterexample path.

use serde::Serialize;

use crate::linz::{delinearize, ev, linearize, sr_decompose};
use crate::nilq::{bch, exp_ssr, log_ssr, TransversalChart};
use crate::poly::{format_rational, Rational};
use crate::rng::SplitMix64;
use crate::sample::{random_field, random_field_in, random_point, random_ssr, random_subalgebra, random_subresonant};
use crate::sralg::{AlgebraError, PolyMap, PolyMapSpec, WeightedSpace};

pub type ComposeFn = fn(&PolyMap, &PolyMap) -> Result<PolyMap, AlgebraError>;

pub fn exact_compose(f: &PolyMap, g: &PolyMap) -> Result<PolyMap, AlgebraError> {
    f.compose(g)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Counterexample {
    pub law: String,
    pub profile: Vec<String>,
    pub sample: usize,
    pub maps: Vec<PolyMapSpec>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LawResult {
    pub law: String,
    pub profile: Vec<String>,
    pub passed: usize,
    pub total: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub laws: Vec<LawResult>,
    pub counterexamples: Vec<Counterexample>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.counterexamples.is_empty() && self.laws.iter().all(|l| l.passed == l.total)
    }
}

/// Sample counts for one battery run.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub profiles: Vec<Vec<Rational>>,
    pub map_samples: usize,
    pub nilq_samples: usize,
    pub seed: u64,
}

struct Tally<'a> {
    profile: &'a [String],
    laws: Vec<LawResult>,
    counterexamples: Vec<Counterexample>,
}

impl Tally<'_> {
    fn record(&mut self, law: &str, sample: usize, outcome: Outcome) {
        let idx = match self.laws.iter().position(|l| l.law == law) {
            Some(i) => i,
            None => {
                self.laws.push(LawResult { law: law.into(), profile: self.profile.to_vec(), passed: 0, total: 0 });
                self.laws.len() - 1
            }
        };
        self.laws[idx].total += 1;
        match outcome {
            Ok(()) => self.laws[idx].passed += 1,
            Err((maps, detail)) => {
                // Keep the first counterexample per law.
                if !self.counterexamples.iter().any(|c| c.law == law) {
                    self.counterexamples.push(Counterexample {
                        law: law.into(),
                        profile: self.profile.to_vec(),
                        sample,
                        maps: maps.iter().map(PolyMap::to_spec).collect(),
                        detail,
                    });
                }
            }
        }
    }
}

type Outcome = Result<(), (Vec<PolyMap>, String)>;

fn fail(maps: &[&PolyMap], detail: String) -> Outcome {
    Err((maps.iter().map(|m| (*m).clone()).collect(), detail))
}

fn check(cond: bool, maps: &[&PolyMap], detail: &str) -> Outcome {
    if cond {
        Ok(())
    } else {
        fail(maps, detail.to_string())
    }
}

fn err_detail<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

pub fn algebra_suite(cfg: &SuiteConfig, compose: ComposeFn) -> SuiteReport {
    let mut report = SuiteReport { laws: Vec::new(), counterexamples: Vec::new(), warnings: Vec::new() };
    if cfg.map_samples == 0 && cfg.nilq_samples == 0 {
        report.warnings.push("zero samples requested: all laws pass vacuously".into());
    }
    let mut rng = SplitMix64::new(cfg.seed);
    for weights in &cfg.profiles {
        let space = match WeightedSpace::from_weights(weights.clone()) {
            Ok(s) => s,
            Err(e) => {
                report.warnings.push(format!("skipped profile: {e}"));
                continue;
            }
        };
        let profile: Vec<String> = weights.iter().map(format_rational).collect();
        let mut tally = Tally { profile: &profile, laws: Vec::new(), counterexamples: Vec::new() };
        for s in 0..cfg.map_samples {
            map_laws(&mut tally, &mut rng, &space, s, compose);
        }
        for s in 0..cfg.nilq_samples {
            nilq_laws(&mut tally, &mut rng, &space, s);
        }
        report.laws.extend(tally.laws);
        report.counterexamples.extend(tally.counterexamples);
    }
    report
}

fn map_laws(t: &mut Tally, rng: &mut SplitMix64, space: &WeightedSpace, s: usize, compose: ComposeFn) {
    let f = random_subresonant(rng, space);
    let g = random_subresonant(rng, space);
    let h = random_ssr(rng, space);
    let v = random_point(rng, space);

    let fg = compose(&f, &g);
    t.record(
        "composition_closure",
        s,
        match &fg {
            Ok(fg) => check(fg.is_subresonant(), &[&f, &g], "composition is not subresonant"),
            Err(e) => fail(&[&f, &g], err_detail(e)),
        },
    );

    let inv = h.invert_ssr();
    t.record(
        "ssr_inversion",
        s,
        match &inv {
            Ok(hi) => match (compose(&h, hi), compose(hi, &h)) {
                (Ok(a), Ok(b)) => check(a.is_identity() && b.is_identity(), &[&h, hi], "F ∘ F⁻¹ is not the identity"),
                (Err(e), _) | (_, Err(e)) => fail(&[&h, hi], err_detail(e)),
            },
            Err(e) => fail(&[&h], err_detail(e)),
        },
    );

    t.record(
        "linearization_homomorphism",
        s,
        match (&fg, linearize(&f), linearize(&g)) {
            (Ok(fg), Ok(lf), Ok(lg)) => match linearize(fg) {
                Ok(lfg) => check(lfg.matrix == lf.matrix.mul(&lg.matrix), &[&f, &g], "ρ(F∘G) ≠ ρ(F)ρ(G)"),
                Err(e) => fail(&[&f, &g], err_detail(e)),
            },
            _ => fail(&[&f, &g], "linearization failed".into()),
        },
    );

    t.record(
        "ev_equivariance",
        s,
        match linearize(&f) {
            Ok(lf) => {
                let lhs = f.eval(&v).and_then(|fv| ev(&fv, &lf.basis_tgt));
                let rhs = ev(&v, &lf.basis_src).map(|e| lf.matrix.mul_vec(&e));
                check(lhs.is_ok() && lhs == rhs, &[&f], "ev(F(v)) ≠ ρ(F) ev(v)")
            }
            Err(e) => fail(&[&f], err_detail(e)),
        },
    );

    t.record(
        "delinearize_roundtrip",
        s,
        match linearize(&f).and_then(|l| delinearize(&l.matrix, &l.basis_src)) {
            Ok(back) => check(back == f, &[&f, &back], "delinearize(linearize(F)) ≠ F"),
            Err(e) => fail(&[&f], err_detail(e)),
        },
    );

    t.record(
        "linearization_triangular",
        s,
        match linearize(&f) {
            Ok(l) => check(l.filtration_violations().is_empty(), &[&f], "entry raises weight"),
            Err(e) => fail(&[&f], err_detail(e)),
        },
    );

    t.record(
        "sr_decompose_recompose",
        s,
        match sr_decompose(&f) {
            Ok((r, ssr)) => {
                let ok = r.classify().resonant
                    && ssr.is_strictly_subresonant()
                    && compose(&ssr, &r).map(|x| x == f).unwrap_or(false)
                    && sr_decompose(&r).map(|(r2, s2)| r2 == r && s2.is_identity()).unwrap_or(false);
                check(ok, &[&f, &r, &ssr], "F ≠ S ∘ R or decomposition not idempotent")
            }
            Err(e) => fail(&[&f], err_detail(e)),
        },
    );
}

fn nilq_laws(t: &mut Tally, rng: &mut SplitMix64, space: &WeightedSpace, s: usize) {
    let x = random_field(rng, space);
    let y = random_field(rng, space);
    let z = random_field(rng, space);
    let id = PolyMap::identity(space);

    let jacobi = (|| {
        let a = x.bracket(&y.bracket(&z)?)?;
        let b = y.bracket(&z.bracket(&x)?)?;
        let c = z.bracket(&x.bracket(&y)?)?;
        Ok::<bool, crate::nilq::NilqError>(a.add(&b)?.add(&c)?.is_zero())
    })();
    t.record("jacobi", s, check(jacobi == Ok(true), &[], "Jacobi identity fails"));

    let roundtrip = exp_ssr(&x).and_then(|f| Ok((log_ssr(&f)?, f)));
    t.record(
        "exp_log_roundtrip",
        s,
        match &roundtrip {
            Ok((lx, f)) => check(lx == &x && exp_ssr(lx).as_ref() == Ok(f), &[f], "log(exp X) ≠ X"),
            Err(e) => fail(&[&id], err_detail(e)),
        },
    );

    let assoc = (|| {
        let l = bch(&bch(&x, &y)?, &z)?;
        let r = bch(&x, &bch(&y, &z)?)?;
        Ok::<bool, crate::nilq::NilqError>(l == r)
    })();
    t.record("bch_associativity", s, check(assoc == Ok(true), &[], "BCH is not associative"));

    let sub = random_subalgebra(rng, space);
    let chart = TransversalChart::orthogonal(&sub);
    let v: Vec<Rational> = (0..chart.v_dim()).map(|_| rng.small_rational(5, 3)).collect();
    let u: Vec<Rational> = (0..sub.dim()).map(|_| rng.small_rational(5, 3)).collect();
    let inv = chart.ch_chart(&v, &u).and_then(|n| chart.ch_inverse(&n));
    t.record(
        "chart_invertibility",
        s,
        check(inv.as_ref().map(|p| p.0 == v && p.1 == u).unwrap_or(false), &[], "ch⁻¹(ch(v, u)) ≠ (v, u)"),
    );

    let fwd = chart.chart_map();
    let sym = chart.inverse_chart_map();
    let ok = fwd.is_subresonant()
        && match &sym {
            Ok(back) => back.is_subresonant() && back.compose_unchecked(&fwd).map(|m| m.is_identity()).unwrap_or(false),
            Err(_) => false,
        };
    t.record("chart_subresonance", s, check(ok, &[&fwd], "chart or inverse chart is not subresonant"));

    let n = random_field_in(rng, chart.algebra());
    let w = sub.element(&u).expect("coordinates match the subalgebra");
    let inv = (|| Ok::<bool, crate::nilq::NilqError>(chart.coset_reduce(&bch(&n, &w)?)? == chart.coset_reduce(&n)?))();
    t.record("coset_invariance", s, check(inv == Ok(true), &[], "coset_reduce is not right-invariant"));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn small_battery_passes() {
        let cfg = SuiteConfig { profiles: vec![vec![rat(2), rat(1)]], map_samples: 20, nilq_samples: 5, seed: 3 };
        let r = algebra_suite(&cfg, exact_compose);
        assert!(r.all_passed(), "{:?}", r.counterexamples);
        assert!(r.laws.iter().all(|l| l.total > 0));
    }

    #[test]
    fn zero_samples_warn() {
        let cfg = SuiteConfig { profiles: vec![vec![rat(1)]], map_samples: 0, nilq_samples: 0, seed: 0 };
        let r = algebra_suite(&cfg, exact_compose);
        assert!(r.all_passed());
        assert_eq!(r.warnings.len(), 1);
    }
}
