//! Small dense linear algebra used by the solver and the estimator.
//!
//! Everything is generic over [`Scalar`], implemented for `f64` and for the
//! double-double type [`Dd`]. The constraint systems built from click
//! statistics are close to Vandermonde matrices, and above a dozen or so
//! detector channels their conditioning outruns plain `f64`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

pub use crate::dd::Dd;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + PartialOrd
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    /// Unit roundoff.
    const EPSILON: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }

    /// `sum a_i b_i`
    fn dot_iter(pairs: impl Iterator<Item = (Self, Self)>) -> Self {
        let mut s = Self::zero();
        for (a, b) in pairs {
            s += a * b;
        }
        s
    }
}

impl Scalar for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn dot_iter(pairs: impl Iterator<Item = (Self, Self)>) -> Self {
        pairs.map(|(a, b)| a * b).collect::<NeumaierSum>().value()
    }
}

impl Scalar for Dd {
    const EPSILON: f64 = f64::EPSILON * f64::EPSILON;

    fn from_f64(v: f64) -> Self {
        Dd::from_f64(v)
    }

    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }

    fn abs(self) -> Self {
        Dd::abs(self)
    }

    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }

    fn is_finite(self) -> bool {
        Dd::is_finite(self)
    }
}

pub fn lift<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::from_f64(x)).collect()
}

pub fn lower<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64()).collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    T::dot_iter(a.iter().copied().zip(b.iter().copied()))
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T y`
    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        (0..self.cols)
            .map(|j| T::dot_iter(y.iter().enumerate().map(|(i, &yi)| (self.get(i, j), yi))))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rows `idx` of `self`, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }
}

impl Matrix<f64> {
    pub fn to_dd(&self) -> Matrix<Dd> {
        self.map(Dd::from_f64)
    }
}

impl Matrix<Dd> {
    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|v| v.to_f64())
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .collect::<NeumaierSum>()
        .value()
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<T = f64> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl<T: Scalar> Lu<T> {
    /// Factorizes `a` (row-major, `n x n`). Fails if a pivot falls below
    /// `singular_tol` in magnitude.
    pub fn factorize(mut a: Vec<T>, n: usize, singular_tol: f64) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, a[i * n + k].abs().to_f64()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv < singular_tol {
                return Err(Error::Singular { pivot: pv });
            }
            min_pivot = min_pivot.min(pv);
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let akj = a[k * n + j];
                        a[i * n + j] -= f * akj;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            min_pivot,
        })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T y = c`.
    pub fn solve_transpose(&self, c: &[T]) -> Vec<T> {
        let n = self.n;
        // U^T w = c
        let mut w = c.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        // L^T v = w
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s;
        }
        let mut y = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        y
    }
}

/// Orthonormal basis of the row space of `a`, by modified Gram-Schmidt with
/// one reorthogonalization pass. A row whose remainder drops below
/// `drop_tol` times its original norm is treated as dependent and skipped.
/// Returns the basis and the indices of the rows that contributed.
pub fn orthonormal_rows<T: Scalar>(a: &Matrix<T>, drop_tol: f64) -> (Matrix<T>, Vec<usize>) {
    let n = a.cols();
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..a.rows() {
        let mut v = a.row(i).to_vec();
        let norm0 = dot(&v, &v).sqrt().to_f64();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                for (vj, &qj) in v.iter_mut().zip(q) {
                    *vj -= c * qj;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm.to_f64() <= drop_tol * norm0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x = *x / norm);
        basis.push(v);
        kept.push(i);
    }
    let q = Matrix::from_fn(basis.len(), n, |i, j| basis[i][j]);
    (q, kept)
}

/// Solves a square system with one step of iterative refinement.
pub fn solve_refined<T: Scalar>(a: &Matrix<T>, b: &[T], singular_tol: f64) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let lu = Lu::factorize(a.data.clone(), n, singular_tol)?;
    let mut x = lu.solve(b);
    let r: Vec<T> = a.mul_vec(&x).iter().zip(b).map(|(&ax, &bi)| bi - ax).collect();
    let dx = lu.solve(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_transposes() {
        let a = Matrix::from_rows(vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let lu = Lu::factorize(a.data.clone(), 3, 1e-12).unwrap();
        let x = lu.solve(&[3.0, 2.0, 4.0]);
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip([3.0, 2.0, 4.0]) {
            assert!((l - r).abs() < 1e-14);
        }
        let y = lu.solve_transpose(&[1.0, -1.0, 2.0]);
        let aty = a.tr_mul_vec(&y);
        for (l, r) in aty.iter().zip([1.0, -1.0, 2.0]) {
            assert!((l - r).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            Lu::factorize(a, 2, 1e-12),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
