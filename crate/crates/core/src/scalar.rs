//! Scalar abstraction shared by the numeric building blocks.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field used by quadrature, dense linear algebra, grid functions and
/// Laplace inversion. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Error-free transformation `a + b = s + e` (Knuth's TwoSum).
#[inline]
pub fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product `a * b = p + e`, relying on a fused multiply-add.
#[inline]
pub fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Unevaluated sum `hi + lo` carrying roughly twice the working precision.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleWord<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> DoubleWord<T> {
    pub fn new(hi: T, lo: T) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn zero() -> Self {
        Self { hi: T::zero(), lo: T::zero() }
    }

    /// Multiply by a working-precision scalar.
    pub fn mul_scalar(self, x: T) -> Self {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        Self::new(p, e)
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }
}

impl<T: Real> std::ops::Add for DoubleWord<T> {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        Self::new(s, e)
    }
}
