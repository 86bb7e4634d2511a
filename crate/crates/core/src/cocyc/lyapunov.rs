use serde::Serialize;
use twofloat::TwoFloat;

use super::real::{Real, Square};
use super::{CocycError, CocycleTrace, Precision};

/// Time-averaged QR growth rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Largest first.
    pub exponents: Vec<f64>,
    /// Average of `log|det A_n|` over the same steps, computed independently.
    pub mean_log_det: f64,
    pub warmup: usize,
    pub steps_used: usize,
}

/// Steps discarded while the QR frame aligns with the Oseledets flag.
pub fn default_warmup(steps: usize) -> usize {
    (steps / 10).min(200)
}

pub fn lyapunov_qr(trace: &CocycleTrace) -> Result<LyapunovEstimate, CocycError> {
    lyapunov_qr_with(trace, default_warmup(trace.steps()))
}

pub fn lyapunov_qr_with(trace: &CocycleTrace, warmup: usize) -> Result<LyapunovEstimate, CocycError> {
    if warmup >= trace.steps() {
        return Err(CocycError::Horizon(format!("warm-up {warmup} leaves no steps of {}", trace.steps())));
    }
    match trace.precision() {
        Precision::Double => run::<f64>(trace, warmup),
        Precision::Extended => run::<TwoFloat>(trace, warmup),
    }
}

fn run<R: Real>(trace: &CocycleTrace, warmup: usize) -> Result<LyapunovEstimate, CocycError> {
    let d = trace.fiber_dim();
    let mut q = Square::<R>::identity(d);
    let mut sums = vec![R::zero(); d];
    let mut log_det = R::zero();
    for (n, m) in trace.matrices().iter().enumerate() {
        let a = Square::<R>::from_f64(d, (0..d * d).map(|k| m[(k / d, k % d)]));
        let z = a.mul(&q);
        let (next, diag) = z.qr();
        // Hadamard ratio |det Z| / Π‖columns‖ detects numerically singular steps.
        let hadamard = (0..d).fold(1.0, |acc, j| {
            let col = (0..d).map(|i| z.at(i, j).to_f64().powi(2)).sum::<f64>().sqrt();
            acc * diag[j].to_f64() / col
        });
        if !(hadamard > 1e-13) || diag.iter().any(|r| !r.to_f64().is_finite()) {
            return Err(CocycError::SingularStep(n));
        }
        if n >= warmup {
            for (s, r) in sums.iter_mut().zip(&diag) {
                *s = *s + r.ln();
            }
            log_det = log_det + R::from_f64(m.determinant().abs().ln());
        }
        q = next;
    }
    let used = trace.steps() - warmup;
    let count = R::from_f64(used as f64);
    let mut exponents: Vec<f64> = sums.into_iter().map(|s| (s / count).to_f64()).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovEstimate { exponents, mean_log_det: (log_det / count).to_f64(), warmup, steps_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn diagonal_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3f64.exp(), 0.0, 0.0, (-1.1f64).exp()]);
        let est = lyapunov_qr(&CocycleTrace::constant(a, 100).unwrap()).unwrap();
        assert!((est.exponents[0] - 0.3).abs() < 1e-14);
        assert!((est.exponents[1] + 1.1).abs() < 1e-14);
    }

    #[test]
    fn triangular_and_cat() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        let est = lyapunov_qr(&CocycleTrace::constant(a, 1000).unwrap()).unwrap();
        let l2 = 2f64.ln();
        assert!((est.exponents[0] - l2).abs() < 1e-8 && (est.exponents[1] + l2).abs() < 1e-8);

        let cat = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let t = CocycleTrace::constant(cat, 10_000).unwrap();
        let lam = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        for tr in [t.clone(), t.with_precision(Precision::Extended)] {
            let est = lyapunov_qr(&tr).unwrap();
            assert!((est.exponents[0] - lam).abs() < 1e-6, "{:?}", est);
            assert!((est.exponents[1] + lam).abs() < 1e-6);
            assert!((est.exponents.iter().sum::<f64>() - est.mean_log_det).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_step_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(lyapunov_qr(&CocycleTrace::constant(a, 20).unwrap()), Err(CocycError::SingularStep(_))));
    }
}
