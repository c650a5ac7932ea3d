//! The scalar abstraction every field evaluation is generic over.
//!
//! Plain floats (`f32`, `f64`) evaluate values; [`Dual`](crate::Dual)
//! numbers nested to any depth carry exact forward-mode derivatives through
//! the same code paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

/// A black-box real function of the chart coordinates.
pub type OpaqueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Step used when an opaque function has to be differentiated numerically.
pub(crate) const OPAQUE_STEP: f64 = 1e-5;

/// Arithmetic needed by expression evaluation and the geometry kernels.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Real (value) part, with every infinitesimal dropped.
    fn re(self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;

    /// Evaluate an opaque `f64` function at a point of this scalar type.
    ///
    /// Derivative parts are propagated with central differences.
    fn lift_opaque(f: &OpaqueFn, x: &[Self]) -> Self;

    fn abs_re(self) -> f64 {
        self.re().abs()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn tan(self) -> Self {
                <$t>::tan(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            fn lift_opaque(f: &OpaqueFn, x: &[Self]) -> Self {
                let xs: Vec<f64> = x.iter().map(|v| *v as f64).collect();
                f(&xs) as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

/// Central-difference partial of an opaque function, itself opaque.
pub(crate) fn opaque_partial(f: &OpaqueFn, i: usize) -> OpaqueFn {
    let f = Arc::clone(f);
    Arc::new(move |x: &[f64]| {
        let h = OPAQUE_STEP * x[i].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}
