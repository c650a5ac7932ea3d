//! Small dense square matrices over any [`Scalar`].
//!
//! Chart dimensions are tiny, so everything here is plain row-major storage
//! with Gauss–Jordan elimination. Pivots are chosen on the real part, which
//! keeps dual-number derivatives exact.

use std::ops::{Index, IndexMut};

use crate::error::EvalError;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Row-major construction; `data.len()` must be a perfect square.
    pub fn from_row_major(data: Vec<T>) -> Result<Self, EvalError> {
        let n = (data.len() as f64).sqrt().round() as usize;
        if n * n != data.len() {
            return Err(EvalError::Shape {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + self[(i, k)] * rhs[(k, j)];
            }
            acc
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] * s)
    }

    /// `M v`
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut acc = T::zero();
                for (j, vj) in v.iter().enumerate() {
                    acc = acc + self[(i, j)] * *vj;
                }
                acc
            })
            .collect()
    }

    /// `vᵀ M`
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|j| {
                let mut acc = T::zero();
                for (i, vi) in v.iter().enumerate() {
                    acc = acc + *vi * self[(i, j)];
                }
                acc
            })
            .collect()
    }

    /// `uᵀ M v`
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let mv = self.mul_vec(v);
        dot(u, &mv)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs_re()))
    }

    pub fn det(&self) -> T {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs_re()
                        .partial_cmp(&a[s * n + col].abs_re())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[pivot * n + col].re() == 0.0 {
                return T::zero();
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det = det * p;
            for r in (col + 1)..n {
                let factor = a[r * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] = a[r * n + k] - factor * v;
                }
            }
        }
        det
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self, EvalError> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs_re()
                        .partial_cmp(&a[s * n + col].abs_re())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[pivot * n + col].re() == 0.0 {
                return Err(EvalError::Singular);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                    inv.swap(col * n + k, pivot * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] = a[col * n + k] / p;
                inv[col * n + k] = inv[col * n + k] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor.re() == 0.0 && factor.is_zero() {
                    continue;
                }
                for k in 0..n {
                    let av = a[col * n + k];
                    let iv = inv[col * n + k];
                    a[r * n + k] = a[r * n + k] - factor * av;
                    inv[r * n + k] = inv[r * n + k] - factor * iv;
                }
            }
        }
        Ok(Self { n, data: inv })
    }

    /// Solve `M x = b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, EvalError> {
        Ok(self.inverse()?.mul_vec(b))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}

pub fn max_abs<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs_re()))
}

pub fn sub<T: Scalar>(u: &[T], v: &[T]) -> Vec<T> {
    u.iter().zip(v).map(|(a, b)| *a - *b).collect()
}

pub fn add<T: Scalar>(u: &[T], v: &[T]) -> Vec<T> {
    u.iter().zip(v).map(|(a, b)| *a + *b).collect()
}

pub fn scale<T: Scalar>(u: &[T], s: T) -> Vec<T> {
    u.iter().map(|a| *a * s).collect()
}

/// `Some(1.0)` for a positive-definite symmetric matrix, `Some(-1.0)` for a
/// negative-definite one, `None` otherwise (Sylvester's criterion).
pub fn definiteness<T: Scalar>(m: &Mat<T>) -> Option<f64> {
    let n = m.dim();
    let mut pos = true;
    let mut neg = true;
    for k in 1..=n {
        let minor = Mat::from_fn(k, |i, j| m[(i, j)]).det().re();
        pos &= minor > 0.0;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        neg &= sign * minor > 0.0;
    }
    if pos {
        Some(1.0)
    } else if neg {
        Some(-1.0)
    } else {
        None
    }
}
