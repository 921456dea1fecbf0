//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point types the solver can run on (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Hyperbolic cotangent.
#[inline]
pub fn coth<T: Real>(x: T) -> T {
    x.cosh() / x.sinh()
}

/// Inverse hyperbolic tangent, `0.5 * ln((1 + y) / (1 - y))`.
#[inline]
pub fn artanh<T: Real>(y: T) -> T {
    T::half() * ((T::one() + y) / (T::one() - y)).ln()
}

/// `coth r - 1` evaluated without cancellation for large `r`.
#[inline]
pub fn coth_minus_one<T: Real>(r: T) -> T {
    // coth r - 1 = 2 / (e^{2r} - 1)
    T::two() / (T::two() * r).exp_m1()
}

/// Largest absolute entry of a slice, 0 for an empty slice.
pub fn sup_norm<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
