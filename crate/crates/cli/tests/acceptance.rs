//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fail.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use subres_cli::{run, Overrides};
use subres_core::cocyc::{
    adapted_norm, local_stable_manifold, lyapunov_qr, oseledets_flags, subspace_distance, CocycleTrace, SystemDef,
};
use subres_core::nform::{holonomy_graded, normal_form_fixed_point, normal_form_orbit, stable_leaf_pair, Jet};
use subres_core::poly::{rat, ratio, Poly, Rational};
use subres_core::rng::SplitMix64;
use subres_core::suite::{algebra_suite, exact_compose, SuiteConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn profiles() -> Vec<Vec<Rational>> {
    vec![vec![rat(1)], vec![rat(2), rat(1)], vec![rat(3), rat(2), rat(1)], vec![rat(3), rat(2), rat(2), rat(1)]]
}

fn suite_laws(map_samples: usize, nilq_samples: usize) -> Outcome {
    let start = Instant::now();
    let cfg = SuiteConfig { profiles: profiles(), map_samples, nilq_samples, seed: 2024 };
    let rep = algebra_suite(&cfg, exact_compose);
    let secs = start.elapsed().as_secs_f64();
    let checked: usize = rep.laws.iter().map(|l| l.total).sum();
    let failed: usize = rep.laws.iter().map(|l| l.total - l.passed).sum();
    outcome(rep.all_passed() && checked > 0 && secs < 60.0, format!("{checked} checks, {failed} failures, {secs:.1} s"))
}

fn cat_exponents_and_flags() -> Outcome {
    let start = Instant::now();
    let lam = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let trace = SystemDef::cat_map().trace(&[0.1234, 0.5678], 10_000).unwrap();
    let est = lyapunov_qr(&trace).unwrap();
    let exp_err = (est.exponents[0] - lam).abs().max((est.exponents[1] + lam).abs());
    let flags = oseledets_flags(&trace, 5_000, 5_000, None).unwrap();
    let level = flags.level(1).unwrap();
    let line = |v: &[f64]| DMatrix::from_column_slice(2, 1, v);
    let slow = subspace_distance(&line(&level.forward.as_ref().unwrap()[0]), &line(&[1.0, -phi]));
    let fast = subspace_distance(&line(&level.backward.as_ref().unwrap()[0]), &line(&[phi, 1.0]));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        exp_err < 1e-6 && slow < 1e-6 && fast < 1e-6 && secs < 5.0,
        format!("exponent error {exp_err:.1e}, stable angle {slow:.1e}, unstable angle {fast:.1e}, {secs:.2} s"),
    )
}

fn adapted_norm_bounds() -> Outcome {
    let eps = 0.05;
    let trace = SystemDef::cat_map().trace(&[0.1234, 0.5678], 1_000).unwrap();
    let flags = oseledets_flags(&trace, 0, 1_000, None).unwrap();
    let norm = adapted_norm(&trace, eps, &flags).unwrap();
    let check = norm.check_contraction(&mut SplitMix64::new(7), 1_000);

    let line = CocycleTrace::constant(DMatrix::from_element(1, 1, 0.7f64.exp()), 2_000).unwrap();
    let lflags = oseledets_flags(&line, 0, 2_000, None).unwrap();
    let lnorm = adapted_norm(&line, eps, &lflags).unwrap();
    let closed = 1.0 / (1.0 - (-2.0 * eps).exp());
    let err = (lnorm.block_gram(2_000, 0)[(0, 0)] - closed).abs();
    outcome(
        check.violations == 0 && err < 1e-10,
        format!(
            "{} violations over {} steps x {} vectors (worst ratio {:.4}), closed form error {err:.1e}",
            check.violations, check.steps, check.vectors, check.worst_ratio
        ),
    )
}

fn normal_form() -> Outcome {
    let (x, y) = (Poly::var(2, 0), Poly::var(2, 1));
    let x2 = x.mul(&x);
    let a = Jet::new(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x2).add(&x2.mul(&x))], 4).unwrap();
    let w = [rat(1), rat(2)];
    let fp = normal_form_fixed_point(&a, &w, 1e-9).unwrap();
    let want_n = vec![x.clone(), y.sub(&x2.mul(&x).scale(&rat(8)))];
    let want_p = vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x2)];
    let exact = fp.conjugacy.components() == want_n && fp.normal_form.components() == want_p;
    let orbit = normal_form_orbit(&vec![a; 60], &w, 1e-12).unwrap();
    let same = orbit.conjugacy.distance(&fp.conjugacy);
    let rate = orbit.rate.unwrap_or(f64::INFINITY);
    let bound = (-1f64).exp();
    outcome(
        exact && same < 1e-9 && rate <= bound,
        format!(
            "fixed point exact: {exact}, orbit limit distance {same:.1e}, fitted rate {rate:.4} (bound {bound:.4})"
        ),
    )
}

fn stable_manifold() -> Outcome {
    let (x, y) = (Poly::var(2, 0), Poly::var(2, 1));
    let sys = SystemDef::polynomial(vec![x.scale(&ratio(1, 2)), y.scale(&rat(2)).add(&x.mul(&x))]).unwrap();
    let sm = local_stable_manifold(&sys, 6, 1e-9).unwrap();
    let terms: Vec<String> =
        sm.terms.iter().map(|t| format!("{}·x^{:?}", t.exact.clone().unwrap_or_default(), t.exponents)).collect();
    let ok = sm.exact
        && sm.residual == 0.0
        && sm.terms.len() == 1
        && sm.terms[0].exponents == [2]
        && sm.terms[0].exact.as_deref() == Some("-4/7");
    outcome(ok, format!("h = {}, residual {}", terms.join(" + "), sm.residual))
}

fn holonomy() -> Outcome {
    let q = [ratio(1, 7), ratio(2, 7)];
    let (x, y) = stable_leaf_pair(&q, 1e-2, 0.3, 60);
    let hxx = holonomy_graded(&x, &x, &[1], 50).unwrap();
    let hxy = holonomy_graded(&x, &y, &[1], 50).unwrap();
    let hyx = holonomy_graded(&y, &x, &[1], 50).unwrap();
    let defect = ((hxy.matrix() * hyx.matrix())[(0, 0)] - 1.0).abs();
    let ident = hxx.holonomy == vec![vec![1.0]];
    let ratio = hxy.ratio.unwrap_or(f64::NAN);
    outcome(
        ident && defect < 1e-8 && hxy.summable,
        format!("H(x,x) = id: {ident}, |H(x,y)H(y,x) - 1| = {defect:.1e}, increment ratio {ratio:.4}"),
    )
}

fn determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names: Vec<_> = std::fs::read_dir(&configs).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut compared = 0;
    let mut differing = Vec::new();
    for cfg in &names {
        let first = run(cfg, a.path(), &Overrides::default(), false);
        let second = run(cfg, b.path(), &Overrides::default(), false);
        let (Ok(first), Ok(second)) = (first, second) else {
            differing.push(format!("{} did not run", cfg.display()));
            continue;
        };
        for (p, q) in first.iter().zip(&second) {
            compared += 1;
            if std::fs::read(p).unwrap() != std::fs::read(q).unwrap() {
                differing.push(p.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    outcome(
        differing.is_empty() && compared > 0,
        format!("{compared} output files from {} configs compared, differing: {differing:?}", names.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 exact algebra battery", || suite_laws(500, 0)),
        ("2 nilpotent suite", || suite_laws(0, 200)),
        ("3 cat-map exponents and flags", cat_exponents_and_flags),
        ("4 adapted-norm inequalities", adapted_norm_bounds),
        ("5 fixed-point normal form", normal_form),
        ("6 stable-manifold jet", stable_manifold),
        ("7 holonomy laws", holonomy),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        failed += usize::from(!o.pass);
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
