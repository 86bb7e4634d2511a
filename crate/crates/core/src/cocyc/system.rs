use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{CocycError, CocycleTrace, Precision};
use crate::poly::{Poly, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// `q ↦ M q mod 1` on the torus.
    Toral { matrix: Vec<Vec<i64>> },
    /// Explicit polynomial map on `ℝ^d`.
    Polynomial { components: Vec<Poly<Rational>> },
    /// Truncated Taylor jet at a fixed point placed at the origin.
    Jet { components: Vec<Poly<Rational>>, degree: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemDef {
    dim: usize,
    kind: SystemKind,
    invertible: bool,
}

fn int_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0] as i128;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] as i128 * int_det(&minor)
        })
        .sum()
}

impl SystemDef {
    pub fn toral(matrix: Vec<Vec<i64>>) -> Result<Self, CocycError> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|r| r.len() != d) {
            return Err(CocycError::Shape("toral matrix must be square and non-empty".into()));
        }
        let det = int_det(&matrix);
        if det.abs() != 1 {
            return Err(CocycError::Invalid(format!("toral automorphism needs |det| = 1, got {det}")));
        }
        Ok(SystemDef { dim: d, kind: SystemKind::Toral { matrix }, invertible: true })
    }

    pub fn polynomial(components: Vec<Poly<Rational>>) -> Result<Self, CocycError> {
        let d = components.len();
        if d == 0 || components.iter().any(|p| p.nvars() != d) {
            return Err(CocycError::Shape("polynomial map must be a self-map of ℝ^d".into()));
        }
        Ok(SystemDef { dim: d, kind: SystemKind::Polynomial { components }, invertible: false })
    }

    pub fn jet(components: Vec<Poly<Rational>>, degree: u32) -> Result<Self, CocycError> {
        let d = components.len();
        if d == 0 || components.iter().any(|p| p.nvars() != d) {
            return Err(CocycError::Shape("jet must be a self-map of ℝ^d".into()));
        }
        if components.iter().any(|p| !p.constant_term().is_zero()) {
            return Err(CocycError::Invalid("jet must fix the origin".into()));
        }
        let components = components.into_iter().map(|p| p.truncate(degree)).collect();
        Ok(SystemDef { dim: d, kind: SystemKind::Jet { components, degree }, invertible: false })
    }

    /// The cat map `[[2,1],[1,1]]`.
    pub fn cat_map() -> Self {
        Self::toral(vec![vec![2, 1], vec![1, 1]]).expect("cat map is unimodular")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn invertible(&self) -> bool {
        self.invertible
    }

    /// Components as exact polynomials (toral maps give their linear lift).
    pub fn components(&self) -> Vec<Poly<Rational>> {
        match &self.kind {
            SystemKind::Toral { matrix } => matrix
                .iter()
                .map(|row| {
                    Poly::from_terms(
                        self.dim,
                        row.iter().enumerate().map(|(j, &a)| (crate::poly::Monomial::var(self.dim, j), Rational::from_integer(a.into()))),
                    )
                })
                .collect(),
            SystemKind::Polynomial { components } | SystemKind::Jet { components, .. } => components.clone(),
        }
    }

    pub fn step(&self, q: &[f64]) -> Vec<f64> {
        match &self.kind {
            SystemKind::Toral { matrix } => matrix
                .iter()
                .map(|row| row.iter().zip(q).map(|(&a, &x)| a as f64 * x).sum::<f64>().rem_euclid(1.0))
                .collect(),
            SystemKind::Polynomial { components } | SystemKind::Jet { components, .. } => {
                components.iter().map(|p| p.map_coeffs(|c| c.to_f64().unwrap_or(f64::NAN)).eval(q)).collect()
            }
        }
    }

    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        match &self.kind {
            SystemKind::Toral { matrix } => DMatrix::from_fn(d, d, |i, j| matrix[i][j] as f64),
            SystemKind::Polynomial { components } | SystemKind::Jet { components, .. } => DMatrix::from_fn(d, d, |i, j| {
                components[i].derivative(j).map_coeffs(|c| c.to_f64().unwrap_or(f64::NAN)).eval(q)
            }),
        }
    }

    /// Orbit `q₀ … q_T` with the derivative cocycle along it.
    pub fn trace(&self, q0: &[f64], steps: usize) -> Result<CocycleTrace, CocycError> {
        if q0.len() != self.dim {
            return Err(CocycError::Shape(format!("initial point has {} coordinates, expected {}", q0.len(), self.dim)));
        }
        let mut points = vec![q0.to_vec()];
        let mut matrices = Vec::with_capacity(steps);
        for n in 0..steps {
            let q = &points[n];
            matrices.push(self.jacobian(q));
            let next = self.step(q);
            if next.iter().any(|x| !x.is_finite()) {
                return Err(CocycError::Numeric(format!("orbit left the finite range at step {}", n + 1)));
            }
            points.push(next);
        }
        CocycleTrace::new(points, matrices, Precision::Double)
    }
}

/// Exact orbit of a rational point under a toral automorphism.
pub fn toral_orbit_exact(matrix: &[Vec<i64>], q0: &[Rational], steps: usize) -> Vec<Vec<Rational>> {
    let frac = |x: Rational| {
        let floor = x.numer().div_floor(x.denom());
        x - Rational::from_integer(floor)
    };
    let mut out = vec![q0.iter().cloned().map(frac).collect::<Vec<_>>()];
    for n in 0..steps {
        let q = &out[n];
        let next = matrix
            .iter()
            .map(|row| frac(row.iter().zip(q).fold(Rational::zero(), |acc, (&a, x)| acc + x * Rational::from_integer(a.into()))))
            .collect();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    #[test]
    fn toral_validation() {
        assert!(SystemDef::toral(vec![vec![2, 0], vec![0, 1]]).is_err());
        assert!(SystemDef::toral(vec![vec![2, 1], vec![1, 1]]).is_ok());
        assert!(SystemDef::toral(vec![vec![2, 1]]).is_err());
    }

    #[test]
    fn exact_orbit_stays_on_torus() {
        let orbit = toral_orbit_exact(&[vec![2, 1], vec![1, 1]], &[ratio(1, 7), ratio(3, 7)], 20);
        assert_eq!(orbit[1], vec![ratio(5, 7), ratio(4, 7)]);
        assert!(orbit.iter().flatten().all(|x| *x >= rat(0) && *x < rat(1)));
    }

    #[test]
    fn polynomial_jacobian() {
        let x = Poly::<Rational>::var(2, 0);
        let y = Poly::<Rational>::var(2, 1);
        let sys = SystemDef::polynomial(vec![x.scale(&ratio(1, 2)), y.scale(&rat(2)).add(&x.mul(&x))]).unwrap();
        let j = sys.jacobian(&[3.0, 1.0]);
        assert_eq!(j[(1, 0)], 6.0);
        assert_eq!(sys.step(&[2.0, 1.0]), vec![1.0, 6.0]);
    }
}
