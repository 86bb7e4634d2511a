use serde::Serialize;
use serde_json::{json, Value};

use subres_core::cocyc::{
    adapted_norm, local_stable_manifold, lyapunov_qr, oseledets_flags, CocycError, CocycleTrace, Precision, SystemDef,
};
use subres_core::nform::{
    holonomy_graded, normal_form_fixed_point, normal_form_orbit, stable_leaf_pair, Coefficient, ConjugacyResult, Jet,
    NformError, Verdict,
};
use subres_core::poly::{parse_rational, Monomial, Poly, Rational};
use subres_core::rng::SplitMix64;
use subres_core::sralg::{AlgebraError, PolyMap, WeightedSpace};
use subres_core::suite::{algebra_suite, exact_compose, SuiteConfig};

use crate::config::{ExperimentConfig, NormalFormMode, PrecisionMode, SystemConfig, Task};
use crate::CliError;

/// What a task hands back to the runner.
pub struct TaskOutput {
    pub results: Value,
    pub diagnostics: Value,
    pub csv: Option<String>,
    /// Set when the task ran to completion but its verdict is a failure.
    pub failure: Option<String>,
}

impl TaskOutput {
    fn ok<R: Serialize, D: Serialize>(results: R, diagnostics: D) -> Result<Self, CliError> {
        Ok(TaskOutput { results: to_value(results)?, diagnostics: to_value(diagnostics)?, csv: None, failure: None })
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn to_value<T: Serialize>(v: T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(format!("unserializable result: {e}")))
}

fn require<T: Clone>(v: &Option<T>, field: &str, task: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Validation(format!("params.{field}: required for task {task}")))
}

fn cocyc_err(e: CocycError) -> CliError {
    match e {
        CocycError::Shape(_) | CocycError::Horizon(_) | CocycError::Invalid(_) | CocycError::EpsilonTooLarge { .. } => {
            CliError::Validation(e.to_string())
        }
        CocycError::Parse(m) => CliError::Parse(m),
        CocycError::Io(m) => CliError::Io(m),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn nform_err(e: NformError) -> CliError {
    match e {
        NformError::Shape(_) | NformError::InvalidWeights(_) | NformError::NotDiagonal | NformError::NotContracting => {
            CliError::Validation(e.to_string())
        }
        NformError::Cocyc(c) => cocyc_err(c),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn parse_weights(raw: &[String], field: &str) -> Result<Vec<Rational>, CliError> {
    if raw.is_empty() {
        return Err(CliError::Validation(format!("{field}: at least one weight is required")));
    }
    raw.iter()
        .enumerate()
        .map(|(i, s)| {
            let w = parse_rational(s).ok_or_else(|| CliError::Validation(format!("{field}[{i}]: `{s}` is not a rational")))?;
            if w <= Rational::from_integer(0.into()) {
                return Err(CliError::Validation(format!("{field}[{i}]: weight {s} must be positive")));
            }
            Ok(w)
        })
        .collect()
}

fn parse_map(coords: &[String], text: &str) -> Result<Vec<Poly<Rational>>, CliError> {
    let ones = vec![Rational::from_integer(1.into()); coords.len()];
    let space = WeightedSpace::new(coords.to_vec(), ones).map_err(|e| CliError::Validation(format!("system.coords: {e}")))?;
    let map = PolyMap::from_text(text, &space, &space).map_err(|e| match e {
        AlgebraError::Parse(m) => CliError::Parse(format!("system.map: {m}")),
        other => CliError::Validation(format!("system.map: {other}")),
    })?;
    Ok(map.components().to_vec())
}

fn system(cfg: &ExperimentConfig) -> Result<SystemDef, CliError> {
    let sys = cfg.system.as_ref().ok_or_else(|| CliError::Validation("system: required for this task".into()))?;
    match sys {
        SystemConfig::CatMap => Ok(SystemDef::cat_map()),
        SystemConfig::Toral { matrix } => SystemDef::toral(matrix.clone()).map_err(|e| CliError::Validation(format!("system.matrix: {e}"))),
        SystemConfig::Polynomial { coords, map } => {
            SystemDef::polynomial(parse_map(coords, map)?).map_err(|e| CliError::Validation(format!("system.map: {e}")))
        }
        SystemConfig::Jet { coords, map, degree } => {
            SystemDef::jet(parse_map(coords, map)?, *degree).map_err(|e| CliError::Validation(format!("system.map: {e}")))
        }
    }
}

fn float_precision(cfg: &ExperimentConfig, task: &str) -> Result<Precision, CliError> {
    match cfg.precision {
        None | Some(PrecisionMode::Double) => Ok(Precision::Double),
        Some(PrecisionMode::Extended) => Ok(Precision::Extended),
        Some(PrecisionMode::Rational) => Err(CliError::Validation(format!("precision: rational is not available for {task}"))),
    }
}

fn orbit(cfg: &ExperimentConfig, sys: &SystemDef, steps: usize) -> Result<CocycleTrace, CliError> {
    let q0 = match &cfg.params.initial_point {
        Some(p) => p.clone(),
        None if sys.invertible() => {
            let mut rng = SplitMix64::new(cfg.seed);
            (0..sys.dim()).map(|_| rng.next_f64()).collect()
        }
        None => vec![0.0; sys.dim()],
    };
    if q0.len() != sys.dim() {
        return Err(CliError::Validation(format!("params.initial_point: expected {} coordinates, found {}", sys.dim(), q0.len())));
    }
    sys.trace(&q0, steps).map_err(cocyc_err)
}

fn trace_csv(trace: &CocycleTrace) -> Result<String, CliError> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(cocyc_err)?;
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

fn positive(v: usize, field: &str) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::Validation(format!("params.{field}: must be positive")));
    }
    Ok(v)
}

pub fn execute(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    match cfg.task {
        Task::Lyapunov => lyapunov(cfg),
        Task::Flags => flags(cfg),
        Task::AdaptedNorm => norm(cfg),
        Task::StableManifold => stable(cfg),
        Task::NormalForm => normal_form(cfg),
        Task::Holonomy => holonomy(cfg),
        Task::AlgebraSuite => suite(cfg),
    }
}

fn lyapunov(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = system(cfg)?;
    let horizon = positive(require(&cfg.params.horizon, "horizon", "lyapunov")?, "horizon")?;
    let precision = float_precision(cfg, "lyapunov")?;
    let trace = orbit(cfg, &sys, horizon)?.with_precision(precision);
    let est = lyapunov_qr(&trace).map_err(cocyc_err)?;
    let sum: f64 = est.exponents.iter().sum();
    let csv = trace_csv(&trace)?;
    Ok(TaskOutput::ok(
        json!({ "exponents": est.exponents, "mean_log_det": est.mean_log_det, "warmup": est.warmup, "steps_used": est.steps_used }),
        json!({ "exponent_sum_minus_log_det": sum - est.mean_log_det, "horizon": horizon }),
    )?
    .with_csv(csv))
}

fn flags(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = system(cfg)?;
    let horizon = positive(require(&cfg.params.horizon, "horizon", "flags")?, "horizon")?;
    let base = cfg.params.base.unwrap_or(0);
    let trace = orbit(cfg, &sys, base + horizon)?.with_precision(float_precision(cfg, "flags")?);
    let f = oseledets_flags(&trace, base, horizon, cfg.params.threshold).map_err(cocyc_err)?;
    let conditioning: Vec<Value> = f
        .levels
        .iter()
        .map(|l| json!({ "cut": l.cut, "gap": l.gap, "resolved": l.resolved, "transversality": l.transversality }))
        .collect();
    let csv = trace_csv(&trace)?;
    Ok(TaskOutput::ok(&f, json!({ "conditioning": conditioning }))?.with_csv(csv))
}

fn norm(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = system(cfg)?;
    let horizon = positive(require(&cfg.params.horizon, "horizon", "adapted_norm")?, "horizon")?;
    let eps = require(&cfg.params.epsilon, "epsilon", "adapted_norm")?;
    if !(eps > 0.0) {
        return Err(CliError::Validation("params.epsilon: must be positive".into()));
    }
    let trace = orbit(cfg, &sys, horizon)?.with_precision(float_precision(cfg, "adapted_norm")?);
    let f = oseledets_flags(&trace, 0, horizon, cfg.params.threshold).map_err(cocyc_err)?;
    let n = adapted_norm(&trace, eps, &f).map_err(cocyc_err)?;
    let check = n.check_contraction(&mut SplitMix64::new(cfg.seed), cfg.params.vectors.unwrap_or(1000));
    let last = n.points() - 1;
    let grams: Vec<Vec<Vec<f64>>> = (0..n.blocks().len())
        .map(|b| {
            let g = n.block_gram(last, b);
            (0..g.nrows()).map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect()).collect()
        })
        .collect();
    let mut csv = String::from("step,envelope,comparison\n");
    for (j, (e, c)) in n.envelope().iter().zip(n.comparison()).enumerate() {
        csv.push_str(&format!("{j},{e:e},{c:e}\n"));
    }
    let failure = (check.violations > 0).then(|| format!("{} contraction violations", check.violations));
    Ok(TaskOutput {
        results: json!({ "summary": to_value(n.summary())?, "contraction": to_value(&check)?, "final_block_grams": grams }),
        diagnostics: json!({ "exponents": f.exponents }),
        csv: Some(csv),
        failure,
    })
}

fn stable(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let sys = system(cfg)?;
    let degree = require(&cfg.params.degree, "degree", "stable_manifold")?;
    if degree < 2 {
        return Err(CliError::Validation("params.degree: must be at least 2".into()));
    }
    let m = local_stable_manifold(&sys, degree, cfg.params.tol.unwrap_or(1e-9)).map_err(cocyc_err)?;
    let residual = m.residual;
    TaskOutput::ok(&m, json!({ "residual": residual }))
}

fn conjugacy_output<C: Coefficient>(res: ConjugacyResult<C>) -> Result<TaskOutput, CliError> {
    let mut csv = String::from("iteration,deviation\n");
    for (n, d) in res.deviations.iter().enumerate() {
        csv.push_str(&format!("{},{d:e}\n", n + 1));
    }
    let failure = match res.verdict {
        Verdict::Converged => None,
        v => Some(format!("normal form iteration verdict: {v:?}")),
    };
    let report = res.report();
    Ok(TaskOutput { results: to_value(&report)?, diagnostics: json!({}), csv: Some(csv), failure })
}

fn normal_form(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let (comps, jet_degree) = match cfg.system.as_ref() {
        Some(SystemConfig::Jet { coords, map, degree }) => (parse_map(coords, map)?, Some(*degree)),
        Some(SystemConfig::Polynomial { coords, map }) => (parse_map(coords, map)?, None),
        _ => return Err(CliError::Validation("system: normal_form needs a jet or polynomial system".into())),
    };
    let degree = match (cfg.params.degree, jet_degree) {
        (Some(d), _) | (None, Some(d)) => d,
        (None, None) => return Err(CliError::Validation("params.degree: required for task normal_form".into())),
    };
    let weights = parse_weights(&require(&cfg.params.weights, "weights", "normal_form")?, "params.weights")?;
    let tol = cfg.params.tol.unwrap_or(1e-9);
    let mode = cfg.params.mode.unwrap_or_default();
    let steps = positive(cfg.params.steps.unwrap_or(60), "steps")?;
    let jet = Jet::new(comps, degree).map_err(nform_err)?;
    match cfg.precision {
        None | Some(PrecisionMode::Rational) => match mode {
            NormalFormMode::FixedPoint => conjugacy_output(normal_form_fixed_point(&jet, &weights, tol).map_err(nform_err)?),
            NormalFormMode::Orbit => conjugacy_output(normal_form_orbit(&vec![jet; steps], &weights, tol).map_err(nform_err)?),
        },
        Some(_) => {
            let jet = jet.map_coeffs(Coefficient::value);
            match mode {
                NormalFormMode::FixedPoint => conjugacy_output(normal_form_fixed_point(&jet, &weights, tol).map_err(nform_err)?),
                NormalFormMode::Orbit => conjugacy_output(normal_form_orbit(&vec![jet; steps], &weights, tol).map_err(nform_err)?),
            }
        }
    }
}

fn holonomy(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    match cfg.system {
        None | Some(SystemConfig::CatMap) => {}
        _ => return Err(CliError::Validation("system: holonomy is implemented for the cat_map stable-leaf pair".into())),
    }
    let raw = cfg.params.leaf_point.clone().unwrap_or_else(|| vec!["1/7".into(), "2/7".into()]);
    let pt: Vec<Rational> = raw
        .iter()
        .enumerate()
        .map(|(i, s)| parse_rational(s).ok_or_else(|| CliError::Validation(format!("params.leaf_point[{i}]: `{s}` is not a rational"))))
        .collect::<Result<_, _>>()?;
    let x0: [Rational; 2] = pt
        .try_into()
        .map_err(|_| CliError::Validation("params.leaf_point: expected two coordinates".into()))?;
    let t_max = positive(cfg.params.t_max.unwrap_or(50), "t_max")?;
    let (x, y) = stable_leaf_pair(&x0, cfg.params.offset.unwrap_or(1e-2), cfg.params.delta.unwrap_or(0.3), t_max);
    let hxy = holonomy_graded(&x, &y, &[1], t_max).map_err(nform_err)?;
    let hyx = holonomy_graded(&y, &x, &[1], t_max).map_err(nform_err)?;
    let hxx = holonomy_graded(&x, &x, &[1], t_max).map_err(nform_err)?;
    let inverse_defect = product_defect(&hxy.holonomy, &hyx.holonomy);
    let lambda = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let mut csv = String::from("step,increment\n");
    for (t, d) in hxy.increments.iter().enumerate() {
        csv.push_str(&format!("{},{d:e}\n", t + 1));
    }
    let failure = (!hxy.summable).then(|| "increments are not summable at this horizon".to_string());
    Ok(TaskOutput {
        results: json!({ "h_xy": to_value(&hxy)?, "h_yx": hyx.holonomy, "h_xx": hxx.holonomy }),
        diagnostics: json!({ "inverse_defect": inverse_defect, "expected_ratio": (-lambda).exp() }),
        csv: Some(csv),
        failure,
    })
}

/// Largest entry of `A·B − I`.
fn product_defect(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let v: f64 = (0..d).map(|k| a[i][k] * b[k][j]).sum();
            worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

/// Test fixture: composition with a spurious term in the first component.
fn corrupt_compose(f: &PolyMap, g: &PolyMap) -> Result<PolyMap, AlgebraError> {
    let h = f.compose(g)?;
    let n = h.source().dim();
    let mut comps = h.components().to_vec();
    comps[0].add_term(Monomial::var(n, n - 1), Rational::new(1.into(), 3.into()));
    PolyMap::new(h.source().clone(), h.target().clone(), comps)
}

fn suite(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let raw = cfg.params.profiles.clone().unwrap_or_else(|| vec![vec!["3".into(), "2".into(), "1".into()]]);
    let profiles = raw
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let w = parse_weights(p, &format!("params.profiles[{i}]"))?;
            WeightedSpace::from_weights(w.clone()).map_err(|e| CliError::Validation(format!("params.profiles[{i}]: {e}")))?;
            Ok(w)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let map_samples = cfg.params.map_samples.unwrap_or(100);
    let compose = match cfg.params.inject.as_deref() {
        None => exact_compose,
        Some("corrupt_compose") => corrupt_compose,
        Some(other) => return Err(CliError::Validation(format!("params.inject: unknown fixture `{other}`"))),
    };
    let suite_cfg = SuiteConfig { profiles, map_samples, nilq_samples: cfg.params.nilq_samples.unwrap_or(map_samples), seed: cfg.seed };
    let report = algebra_suite(&suite_cfg, compose);
    let failure = (!report.all_passed()).then(|| format!("{} law(s) failed", report.counterexamples.len()));
    let warnings = report.warnings.clone();
    Ok(TaskOutput { results: to_value(&report)?, diagnostics: json!({ "warnings": warnings }), csv: None, failure })
}
