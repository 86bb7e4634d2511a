//! Dense matrices over exact rings, with the nilpotent exponential and
//! logarithm used by the linearization and the nilpotent Lie algebra code.

use num_traits::{One, Zero};

use crate::poly::{rat, Poly, Rational};

/// Minimal ring interface for matrix entries.
pub trait RingElem: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_elem(&self, other: &Self) -> Self;
    fn sub_elem(&self, other: &Self) -> Self;
    fn mul_elem(&self, other: &Self) -> Self;
    fn scale_elem(&self, r: &Rational) -> Self;
}

impl RingElem for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_elem(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_elem(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_elem(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_elem(&self, r: &Rational) -> Self {
        self * r
    }
}

impl RingElem for Poly<Rational> {
    fn zero_like(&self) -> Self {
        Poly::zero(self.nvars())
    }
    fn one_like(&self) -> Self {
        Poly::constant(self.nvars(), Rational::one())
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_elem(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn sub_elem(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn mul_elem(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_elem(&self, r: &Rational) -> Self {
        self.scale(r)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type QMatrix = Matrix<Rational>;

impl<T: RingElem> Matrix<T> {
    /// Matrix filled with the zero of `template`'s ring.
    pub fn zeros_like(rows: usize, cols: usize, template: &T) -> Self {
        Matrix { rows, cols, data: vec![template.zero_like(); rows * cols] }
    }

    pub fn identity_like(n: usize, template: &T) -> Self {
        let mut m = Self::zeros_like(n, n, template);
        for i in 0..n {
            m[(i, i)] = template.one_like();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingElem::is_zero_elem)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let template = self.data.first().or(other.data.first()).expect("empty matrix product");
        let mut out = Self::zeros_like(self.rows, other.cols, template);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero_elem() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero_elem() {
                        continue;
                    }
                    let prod = a.mul_elem(b);
                    let cur = &mut out.data[i * other.cols + j];
                    *cur = cur.add_elem(&prod);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add_elem(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub_elem(b)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.scale_elem(r)).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    /// `Σ_{j≥0} N^j / j!` for nilpotent `N`; `None` if `N^{n+1} ≠ 0`.
    pub fn nilpotent_exp(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let template = self.data.first()?;
        let mut acc = Self::identity_like(n, template);
        let mut power = Self::identity_like(n, template);
        for j in 1..=n + 1 {
            power = power.mul(self);
            if power.is_zero() {
                return Some(acc);
            }
            if j > n {
                return None;
            }
            acc = acc.add(&power.scale(&Rational::new(1.into(), factorial(j))));
        }
        None
    }

    /// `Σ_{j≥1} (−1)^{j+1} (M − I)^j / j` for unipotent `M`; `None` if `M − I` is not nilpotent.
    pub fn unipotent_log(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let template = self.data.first()?;
        let nil = self.sub(&Self::identity_like(n, template));
        let mut acc = Self::zeros_like(n, n, template);
        let mut power = Self::identity_like(n, template);
        for j in 1..=n + 1 {
            power = power.mul(&nil);
            if power.is_zero() {
                return Some(acc);
            }
            if j > n {
                return None;
            }
            let sign = if j % 2 == 1 { rat(1) } else { rat(-1) };
            acc = acc.add(&power.scale(&(sign / rat(j as i64))));
        }
        None
    }
}

fn factorial(j: usize) -> num_bigint::BigInt {
    (1..=j).fold(num_bigint::BigInt::from(1), |acc, k| acc * k)
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &a[(col, j)] * &f;
                    a[(r, j)] = &a[(r, j)] - t;
                    let t = &inv[(col, j)] * &f;
                    inv[(r, j)] = &inv[(r, j)] - t;
                }
            }
        }
        Some(inv)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(row, p);
            let pv = a[(row, col)].clone();
            for j in 0..self.cols {
                a[(row, j)] = &a[(row, j)] / &pv;
            }
            for r in 0..self.rows {
                if r == row || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..self.cols {
                    let t = &a[(row, j)] * &f;
                    a[(r, j)] = &a[(r, j)] - t;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space `{x : A x = 0}`.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); self.cols];
                x[f] = Rational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    x[p] = -r[(i, f)].clone();
                }
                x
            })
            .collect()
    }

    /// Solves `A x = b`, returning `None` when inconsistent. Free variables are set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn determinant(&self) -> Rational {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                a.swap_rows(col, p);
                det = -det;
            }
            let pv = a[(col, col)].clone();
            det *= &pv;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &pv;
                for j in col..n {
                    let t = &a[(col, j)] * &f;
                    a[(r, j)] = &a[(r, j)] - t;
                }
            }
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    fn q(rows: &[&[i64]]) -> QMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    #[test]
    fn exp_log_roundtrip_on_nilpotent() {
        let n = q(&[&[0, 1, 3], &[0, 0, 2], &[0, 0, 0]]);
        let e = n.nilpotent_exp().unwrap();
        assert_eq!(e[(0, 2)], rat(3) + rat(1));
        assert_eq!(e.unipotent_log().unwrap(), n);
    }

    #[test]
    fn non_nilpotent_is_rejected() {
        let n = q(&[&[1, 0], &[0, 0]]);
        assert!(n.nilpotent_exp().is_none());
    }

    #[test]
    fn inverse_solve_det() {
        let a = q(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMatrix::identity(2));
        assert_eq!(a.determinant(), rat(1));
        assert_eq!(a.solve(&[rat(3), rat(2)]).unwrap(), vec![rat(1), rat(1)]);
        let s = q(&[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.null_space(), vec![vec![rat(-2), rat(1)]]);
        assert_eq!(q(&[&[4, 0], &[0, 1]]).solve(&[rat(1), rat(0)]).unwrap()[0], ratio(1, 4));
    }
}
