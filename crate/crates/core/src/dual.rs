//! Forward-mode dual numbers, nestable for higher derivatives.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::scalar::{opaque_partial, OpaqueFn, Scalar};

/// `re + eps·ε` with `ε² = 0`.
///
/// `Dual<Dual<f64>>` carries mixed second derivatives, and so on.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    #[inline]
    pub fn constant(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    #[inline]
    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    /// Apply `f` with derivative `df` (both evaluated at `re`) by the chain rule.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}ε)", self.re, self.eps)
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        Self::new(q, (self.eps - q * rhs.eps) / rhs.re)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    #[inline]
    fn re(self) -> f64 {
        self.re.re()
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (T::from_f64(2.0) * s))
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => {
                let lower = self.re.powi(n - 1);
                self.chain(lower * self.re, T::from_f64(n as f64) * lower)
            }
        }
    }

    fn lift_opaque(f: &OpaqueFn, x: &[Self]) -> Self {
        let base: Vec<T> = x.iter().map(|d| d.re).collect();
        let re = T::lift_opaque(f, &base);
        let mut eps = T::zero();
        for (i, d) in x.iter().enumerate() {
            if d.eps.is_zero() {
                continue;
            }
            let partial = opaque_partial(f, i);
            eps = eps + T::lift_opaque(&partial, &base) * d.eps;
        }
        Self { re, eps }
    }
}
