use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{fit_rate, NformError};
use crate::cocyc::{toral_orbit_exact, CocycleTrace, Precision};
use crate::poly::Rational;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolonomyResult {
    /// `H(x, y)` at `t_max`, block diagonal.
    pub holonomy: Vec<Vec<f64>>,
    pub t_max: usize,
    /// `‖gr I^t − gr I^{t−1}‖` for `t = 1 … t_max`, largest entry.
    pub increments: Vec<f64>,
    /// Fitted per-step ratio of the increments.
    pub ratio: Option<f64>,
    /// Geometric bound on the neglected tail.
    pub tail_estimate: f64,
    pub summable: bool,
}

impl HolonomyResult {
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.holonomy.len();
        DMatrix::from_fn(d, d, |i, j| self.holonomy[i][j])
    }
}

fn graded(m: &DMatrix<f64>, blocks: &[(usize, usize)]) -> Result<DMatrix<f64>, NformError> {
    let d = m.nrows();
    let mut out = DMatrix::zeros(d, d);
    for (bi, &(s, e)) in blocks.iter().enumerate() {
        for &(s2, e2) in &blocks[..bi] {
            if m.view((s, s2), (e - s, e2 - s2)).iter().any(|v| *v != 0.0) {
                return Err(NformError::Shape("cocycle matrices must be block upper triangular for the grading".into()));
            }
        }
        out.view_mut((s, s), (e - s, e - s)).copy_from(&m.view((s, s), (e - s, e - s)));
    }
    Ok(out)
}

/// Graded holonomy `H(x, y) = lim (gr A^t_y)⁻¹ (gr A^t_x)` from two orbit
/// traces, with the identity as the fiber identification. Each increment
/// `(A^t_y)⁻¹ (A_y⁻¹ (A_x − A_y)) A^t_x` is accumulated separately, so equal
/// steps contribute exactly nothing.
pub fn holonomy_graded(x: &CocycleTrace, y: &CocycleTrace, blocks: &[usize], t_max: usize) -> Result<HolonomyResult, NformError> {
    let d = x.fiber_dim();
    if y.fiber_dim() != d || blocks.iter().sum::<usize>() != d || blocks.contains(&0) {
        return Err(NformError::Shape("block sizes must partition the common fiber dimension".into()));
    }
    if t_max == 0 || t_max > x.steps().min(y.steps()) {
        return Err(NformError::Shape(format!("t_max {t_max} exceeds the traces")));
    }
    let mut ranges = Vec::new();
    let mut at = 0;
    for &b in blocks {
        ranges.push((at, at + b));
        at += b;
    }
    let mut h = DMatrix::<f64>::identity(d, d);
    let mut fwd_x = DMatrix::<f64>::identity(d, d);
    let mut back_y = DMatrix::<f64>::identity(d, d);
    let mut increments = Vec::with_capacity(t_max);
    for t in 0..t_max {
        let ax = graded(&x.matrices()[t], &ranges)?;
        let ay = graded(&y.matrices()[t], &ranges)?;
        let ay_inv = ay.clone().try_inverse().ok_or(NformError::Cocyc(crate::cocyc::CocycError::SingularStep(t)))?;
        let step = &back_y * (&ay_inv * (&ax - &ay)) * &fwd_x;
        increments.push(step.amax());
        h += step;
        fwd_x = &ax * fwd_x;
        back_y *= ay_inv;
    }
    let ratio = fit_rate(&increments);
    let summable = ratio.is_some_and(|r| r < 1.0);
    let last = *increments.last().unwrap_or(&0.0);
    let tail_estimate = match ratio {
        Some(r) if r < 1.0 => last * r / (1.0 - r),
        _ => f64::INFINITY,
    };
    Ok(HolonomyResult {
        holonomy: (0..d).map(|i| (0..d).map(|j| h[(i, j)]).collect()).collect(),
        t_max,
        increments,
        ratio,
        tail_estimate,
        summable,
    })
}

/// Two cat-map orbits on one stable leaf, `y_0 = x_0 + s·v` with `v` the unit
/// contracting eigenvector, carrying the scalar cocycle
/// `a(q) = μ·exp(δ sin 2πq₁)` where `μ = ((3 − √5)/2)` is the contraction of
/// the tangent cocycle along the leaf. `δ = 0` is the tangent cocycle itself.
/// The `x` orbit is exact; `y_t = x_t + μ^t s v` avoids chaotic round-off.
pub fn stable_leaf_pair(x0: &[Rational; 2], offset: f64, delta: f64, steps: usize) -> (CocycleTrace, CocycleTrace) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mu = 1.0 / (phi * phi);
    let norm = (1.0 + phi * phi).sqrt();
    let v = [1.0 / norm, -phi / norm];
    let xs: Vec<Vec<f64>> = toral_orbit_exact(&[vec![2, 1], vec![1, 1]], x0, steps)
        .into_iter()
        .map(|q| q.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let ys: Vec<Vec<f64>> = xs
        .iter()
        .enumerate()
        .map(|(t, q)| {
            let shift = mu.powi(t as i32) * offset;
            vec![(q[0] + shift * v[0]).rem_euclid(1.0), (q[1] + shift * v[1]).rem_euclid(1.0)]
        })
        .collect();
    let cocycle = |q: &Vec<f64>| DMatrix::from_element(1, 1, mu * (delta * (2.0 * std::f64::consts::PI * q[0]).sin()).exp());
    let mx = xs[..steps].iter().map(cocycle).collect();
    let my = ys[..steps].iter().map(cocycle).collect();
    (
        CocycleTrace::new(xs, mx, Precision::Double).expect("consistent shapes"),
        CocycleTrace::new(ys, my, Precision::Double).expect("consistent shapes"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    #[test]
    fn same_orbit_gives_identity() {
        let (x, _) = stable_leaf_pair(&[ratio(1, 7), ratio(2, 7)], 1e-3, 0.3, 60);
        let h = holonomy_graded(&x, &x, &[1], 50).unwrap();
        assert_eq!(h.holonomy, vec![vec![1.0]]);
        assert!(h.increments.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn constant_cocycle_gives_identity() {
        let (x, y) = stable_leaf_pair(&[ratio(1, 7), ratio(2, 7)], 1e-3, 0.0, 60);
        assert_eq!(holonomy_graded(&x, &y, &[1], 50).unwrap().holonomy, vec![vec![1.0]]);
    }

    #[test]
    fn leaf_pair_is_symmetric_and_geometric() {
        let (x, y) = stable_leaf_pair(&[ratio(1, 7), ratio(2, 7)], 1e-2, 0.3, 60);
        let hxy = holonomy_graded(&x, &y, &[1], 50).unwrap();
        let hyx = holonomy_graded(&y, &x, &[1], 50).unwrap();
        assert!((hxy.matrix() * hyx.matrix())[(0, 0)] - 1.0 < 1e-8);
        assert!(hxy.summable);
        let lam = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((hxy.ratio.unwrap().ln() + lam).abs() < 0.2, "{:?}", hxy.ratio);
    }

    #[test]
    fn non_triangular_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let t = CocycleTrace::constant(a, 5).unwrap();
        assert!(holonomy_graded(&t, &t, &[1, 1], 3).is_err());
    }
}
