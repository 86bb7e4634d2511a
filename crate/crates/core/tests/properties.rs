//! Algebraic laws and numerical invariants checked on seeded random samples.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use subres_core::cocyc::{
    adapted_norm, check_tempered, local_stable_manifold, lyapunov_qr, oseledets_flags, qr_frames, subspace_distance,
    CocycleTrace, Precision, SystemDef,
};
use subres_core::linz::{delinearize, ev, invert_sr, linearize, sr_decompose};
use subres_core::nform::{holonomy_graded, normal_form_fixed_point, sr_split, stable_leaf_pair, Jet};
use subres_core::nilq::{bch, exp_ssr, log_ssr, NilAlgebra};
use subres_core::poly::{rat, ratio, Monomial, Poly, Rational};
use subres_core::rng::SplitMix64;
use subres_core::sample::{random_field_in, random_point, random_ssr, random_subresonant};
use subres_core::sralg::WeightedSpace;

fn profiles() -> impl Strategy<Value = Vec<Rational>> {
    prop_oneof![
        Just(vec![rat(1)]),
        Just(vec![rat(2), rat(1)]),
        Just(vec![rat(3), rat(2), rat(1)]),
        Just(vec![ratio(3, 2), rat(1), ratio(1, 2)]),
        Just(vec![rat(3), rat(2), rat(2), rat(1)]),
    ]
}

fn space(weights: Vec<Rational>) -> WeightedSpace {
    WeightedSpace::from_weights(weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subresonant_maps_form_a_monoid(w in profiles(), seed in any::<u64>()) {
        let s = space(w);
        let mut rng = SplitMix64::new(seed);
        let (f, g, h) = (random_subresonant(&mut rng, &s), random_subresonant(&mut rng, &s), random_subresonant(&mut rng, &s));
        let fg = f.compose(&g).unwrap();
        prop_assert!(fg.is_subresonant());
        prop_assert_eq!(fg.compose(&h).unwrap(), f.compose(&g.compose(&h).unwrap()).unwrap());
        let id = subres_core::sralg::PolyMap::identity(&s);
        prop_assert_eq!(f.compose(&id).unwrap(), f.clone());
        prop_assert_eq!(id.compose(&f).unwrap(), f);
    }

    #[test]
    fn ssr_maps_invert(w in profiles(), seed in any::<u64>()) {
        let s = space(w);
        let mut rng = SplitMix64::new(seed);
        let f = random_ssr(&mut rng, &s);
        let fi = f.invert_ssr().unwrap();
        prop_assert!(fi.is_strictly_subresonant());
        prop_assert!(f.compose(&fi).unwrap().is_identity());
        prop_assert!(fi.compose(&f).unwrap().is_identity());
        prop_assert_eq!(invert_sr(&f).unwrap(), fi);
    }

    #[test]
    fn linearization_is_a_faithful_representation(w in profiles(), seed in any::<u64>()) {
        let s = space(w);
        let mut rng = SplitMix64::new(seed);
        let (f, g) = (random_subresonant(&mut rng, &s), random_subresonant(&mut rng, &s));
        let (lf, lg) = (linearize(&f).unwrap(), linearize(&g).unwrap());
        let lfg = linearize(&f.compose(&g).unwrap()).unwrap();
        prop_assert_eq!(lfg.matrix, lf.matrix.mul(&lg.matrix));
        prop_assert!(lf.filtration_violations().is_empty());
        prop_assert_eq!(delinearize(&lf.matrix, &lf.basis_src).unwrap(), f.clone());
        let v = random_point(&mut rng, &s);
        let lhs = ev(&f.eval(&v).unwrap(), &lf.basis_tgt).unwrap();
        prop_assert_eq!(lhs, lf.matrix.mul_vec(&ev(&v, &lf.basis_src).unwrap()));
    }

    #[test]
    fn decomposition_recombines(w in profiles(), seed in any::<u64>()) {
        let s = space(w);
        let mut rng = SplitMix64::new(seed);
        let f = random_subresonant(&mut rng, &s);
        if !f.has_invertible_graded_differential() {
            return Ok(());
        }
        let (res, ssr) = sr_decompose(&f).unwrap();
        prop_assert!(ssr.is_strictly_subresonant());
        prop_assert_eq!(res.resonant_part(), res.clone());
        prop_assert_eq!(ssr.compose(&res).unwrap(), f);
    }

    #[test]
    fn nilpotent_algebra_laws(w in profiles(), seed in any::<u64>()) {
        let s = space(w);
        let alg = NilAlgebra::new(&s);
        let mut rng = SplitMix64::new(seed);
        let (x, y, z) = (random_field_in(&mut rng, &alg), random_field_in(&mut rng, &alg), random_field_in(&mut rng, &alg));
        let jac = x.bracket(&y.bracket(&z).unwrap()).unwrap()
            .add(&y.bracket(&z.bracket(&x).unwrap()).unwrap()).unwrap()
            .add(&z.bracket(&x.bracket(&y).unwrap()).unwrap()).unwrap();
        prop_assert!(jac.is_zero());
        prop_assert_eq!(log_ssr(&exp_ssr(&x).unwrap()).unwrap(), x.clone());
        let lhs = bch(&bch(&x, &y).unwrap(), &z).unwrap();
        let rhs = bch(&x, &bch(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(bch(&x, &x.neg()).unwrap().is_zero());
    }
}

/// Diagonal contraction `2^{−w_k}` plus random terms of degree `2..=degree`.
fn random_jet(rng: &mut SplitMix64, weights: &[u32], degree: u32) -> Jet<Rational> {
    let n = weights.len();
    let comps = (0..n)
        .map(|k| {
            let mut p = Poly::var(n, k).scale(&ratio(1, 1 << weights[k]));
            for d in 2..=degree {
                for m in subres_core::poly::monomials_by_degree(n, d, d) {
                    if rng.bool(0.4) {
                        p = p.add(&Poly::monomial(m, rng.small_rational(5, 4)));
                    }
                }
            }
            p
        })
        .collect();
    Jet::new(comps, degree).unwrap()
}

fn nform_weights() -> impl Strategy<Value = Vec<u32>> {
    prop_oneof![Just(vec![1, 2]), Just(vec![1, 3]), Just(vec![1, 1, 2]), Just(vec![1, 2, 3])]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jets_form_a_group(w in nform_weights(), seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let (f, g, h) = (random_jet(&mut rng, &w, 4), random_jet(&mut rng, &w, 4), random_jet(&mut rng, &w, 4));
        prop_assert_eq!(f.compose(&g).unwrap().compose(&h).unwrap(), f.compose(&g.compose(&h).unwrap()).unwrap());
        let fi = f.invert().unwrap();
        prop_assert!(f.compose(&fi).unwrap().is_identity());
        prop_assert!(fi.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn split_is_exact_and_idempotent(w in nform_weights(), seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let a = random_jet(&mut rng, &w, 4);
        let ws: Vec<Rational> = w.iter().map(|&k| rat(k as i64)).collect();
        let (pa, r) = sr_split(&a, &ws).unwrap();
        prop_assert_eq!(pa.add(&r), a);
        let (pa2, r2) = sr_split(&pa, &ws).unwrap();
        prop_assert_eq!(pa2, pa.clone());
        prop_assert!(r2.is_zero());
        for (k, p) in r.components().iter().enumerate() {
            for (m, _) in p.terms() {
                prop_assert!(m.weight(&ws) > ws[k]);
            }
        }
    }

    #[test]
    fn fixed_point_conjugacy_is_exact(w in nform_weights(), seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let a = random_jet(&mut rng, &w, 4);
        let ws: Vec<Rational> = w.iter().map(|&k| rat(k as i64)).collect();
        let res = normal_form_fixed_point(&a, &ws, 1e-9).unwrap();
        let n = &res.conjugacy;
        prop_assert!(Jet::linear(&n.linear_part(), 4).unwrap().is_identity());
        let conj = n.invert().unwrap().compose(&a.compose(n).unwrap()).unwrap();
        prop_assert_eq!(&conj, &res.normal_form);
        prop_assert!(sr_split(&res.normal_form, &ws).unwrap().1.is_zero());
        // the conjugacy carries only super-resonant terms
        let (pn, _) = sr_split(n, &ws).unwrap();
        prop_assert!(pn.is_identity());
    }
}

fn random_trace(rng: &mut SplitMix64, d: usize, steps: usize, spread: f64) -> CocycleTrace {
    let mats = (0..steps)
        .map(|_| {
            DMatrix::from_fn(d, d, |i, j| {
                let base = if i == j { (spread * (d as f64 - 1.0 - 2.0 * i as f64)).exp() } else { 0.0 };
                base + 0.3 * rng.normal()
            })
        })
        .collect();
    let pts = vec![vec![0.0]; steps + 1];
    CocycleTrace::new(pts, mats, Precision::Double).unwrap()
}

fn columns(m: &DMatrix<f64>, r: std::ops::Range<usize>) -> DMatrix<f64> {
    m.columns(r.start, r.len()).into_owned()
}

fn from_rows(cols: &[Vec<f64>], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponents_sum_to_mean_log_det(d in 1usize..5, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let t = random_trace(&mut rng, d, 400, 0.4);
        let est = lyapunov_qr(&t).unwrap();
        let sum: f64 = est.exponents.iter().sum();
        prop_assert!((sum - est.mean_log_det).abs() < 1e-10, "{} vs {}", sum, est.mean_log_det);
        prop_assert!(est.exponents.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn qr_frames_are_equivariant(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let t = random_trace(&mut rng, d, 60, 0.4);
        let fr = qr_frames(&t);
        for j in [0usize, 17, 59] {
            let a = &t.matrices()[j];
            for c in 1..d {
                let pushed = a * columns(&fr.forward[j], 0..c);
                prop_assert!(subspace_distance(&pushed, &columns(&fr.forward[j + 1], 0..c)) < 1e-9);
                let pushed = a * columns(&fr.backward[j], c..d);
                prop_assert!(subspace_distance(&pushed, &columns(&fr.backward[j + 1], c..d)) < 1e-9);
            }
        }
    }

    #[test]
    fn slow_flag_is_equivariant(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let t = random_trace(&mut rng, 3, 400, 1.0);
        let f0 = oseledets_flags(&t, 0, 300, None).unwrap();
        let f1 = oseledets_flags(&t, 1, 300, None).unwrap();
        for (l0, l1) in f0.levels.iter().zip(&f1.levels) {
            if let (Some(a), Some(b)) = (&l0.forward, &l1.forward) {
                let pushed = &t.matrices()[0] * from_rows(a, 3);
                prop_assert!(subspace_distance(&pushed, &from_rows(b, 3)) < 1e-8);
            }
        }
    }

    #[test]
    fn adapted_norm_inequalities_hold(seed in any::<u64>(), eps in 0.02f64..0.3) {
        let mut rng = SplitMix64::new(seed);
        let q0 = vec![rng.next_f64(), rng.next_f64()];
        let t = SystemDef::cat_map().trace(&q0, 400).unwrap();
        let flags = oseledets_flags(&t, 0, 400, None).unwrap();
        let norm = adapted_norm(&t, eps, &flags).unwrap();
        let check = norm.check_contraction(&mut rng, 20);
        prop_assert_eq!(check.violations, 0);
        prop_assert!(norm.comparison().iter().all(|&c| c >= 1.0 - 1e-12));
        let v = DVector::from_vec(vec![rng.normal(), rng.normal()]);
        prop_assert!(v.norm() <= norm.norm(200, &v) * (1.0 + 1e-12));
    }

    #[test]
    fn tempered_tracks_growth_rate(rate in 0.0f64..0.5, eps in 0.0f64..0.5, offset in -3.0f64..3.0) {
        let samples: Vec<f64> = (0..200).map(|n| offset + rate * n as f64).collect();
        let rep = check_tempered(&samples, eps);
        if eps > rate + 1e-9 {
            prop_assert!(rep.passes);
        }
        if eps < rate - 1e-9 {
            prop_assert!(!rep.passes);
        }
    }

    #[test]
    fn stable_graph_is_exactly_invariant(
        a in prop_oneof![Just(ratio(1, 2)), Just(ratio(1, 3)), Just(ratio(2, 5))],
        b in prop_oneof![Just(rat(2)), Just(rat(3)), Just(ratio(5, 2))],
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let (x, y) = (Poly::var(2, 0), Poly::var(2, 1));
        let mut comps = vec![x.scale(&a), y.scale(&b)];
        for c in comps.iter_mut() {
            for m in subres_core::poly::monomials_by_degree(2, 2, 3) {
                if rng.bool(0.5) {
                    *c = c.add(&Poly::monomial(m, rng.small_rational(3, 3)));
                }
            }
        }
        let sys = SystemDef::polynomial(comps).unwrap();
        let sm = local_stable_manifold(&sys, 5, 1e-9).unwrap();
        prop_assert!(sm.exact);
        prop_assert_eq!(sm.residual, 0.0);
        prop_assert!(sm.terms.iter().all(|t| t.exponents.iter().sum::<u32>() >= 2));
    }

    #[test]
    fn holonomy_is_a_groupoid(n1 in 0i64..13, n2 in 0i64..13, offset in 1e-4f64..1e-2, delta in 0.0f64..0.5) {
        let q = [ratio(n1, 13), ratio(n2, 13)];
        let (x, y) = stable_leaf_pair(&q, offset, delta, 60);
        let hxx = holonomy_graded(&x, &x, &[1], 50).unwrap();
        prop_assert_eq!(hxx.holonomy, vec![vec![1.0]]);
        let hxy = holonomy_graded(&x, &y, &[1], 50).unwrap();
        let hyx = holonomy_graded(&y, &x, &[1], 50).unwrap();
        prop_assert!(((hxy.matrix() * hyx.matrix())[(0, 0)] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn monomial_weights_are_additive() {
    let w = [rat(3), rat(2), rat(1)];
    let m = Monomial(vec![1, 2, 0]);
    assert_eq!(m.weight(&w), rat(7));
}
