use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use twofloat::TwoFloat;

/// Floating-point arithmetic used by the QR recursion.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
    fn ln(self) -> Self {
        TwoFloat::ln(self)
    }
    fn abs(self) -> Self {
        TwoFloat::abs(&self)
    }
}

/// Square row-major matrix over a [`Real`].
#[derive(Clone, Debug)]
pub(crate) struct Square<R> {
    pub n: usize,
    pub data: Vec<R>,
}

impl<R: Real> Square<R> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![R::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = R::one();
        }
        Square { n, data }
    }

    pub fn from_f64(n: usize, entries: impl Iterator<Item = f64>) -> Self {
        Square { n, data: entries.map(R::from_f64).collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> R {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut data = vec![R::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * other.at(k, j);
                }
            }
        }
        Square { n, data }
    }

    /// Modified Gram–Schmidt with one reorthogonalization pass; returns
    /// `Q` and the diagonal of `R` (non-negative).
    pub fn qr(&self) -> (Self, Vec<R>) {
        let n = self.n;
        let mut cols: Vec<Vec<R>> = (0..n).map(|j| (0..n).map(|i| self.at(i, j)).collect()).collect();
        let mut diag = vec![R::zero(); n];
        for j in 0..n {
            for _ in 0..2 {
                for k in 0..j {
                    let dot = (0..n).fold(R::zero(), |acc, i| acc + cols[k][i] * cols[j][i]);
                    for i in 0..n {
                        cols[j][i] = cols[j][i] - dot * cols[k][i];
                    }
                }
            }
            let norm = (0..n).fold(R::zero(), |acc, i| acc + cols[j][i] * cols[j][i]).sqrt();
            diag[j] = norm;
            if norm > R::zero() {
                for i in 0..n {
                    cols[j][i] = cols[j][i] / norm;
                }
            }
        }
        let mut data = vec![R::zero(); n * n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
        (Square { n, data }, diag)
    }
}
