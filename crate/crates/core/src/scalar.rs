//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    /// Converts a count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn to_f(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used for "exact up to rounding" checks.
    fn loose_eps() -> Self {
        Self::epsilon() * Self::lit(1e5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Maximum of a slice, ignoring nothing: NaN propagates as NaN.
pub fn max_of<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut m = T::neg_infinity();
    for x in xs {
        if x.is_nan() {
            return x;
        }
        if x > m {
            m = x;
        }
    }
    m
}

pub fn min_of<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut m = T::infinity();
    for x in xs {
        if x.is_nan() {
            return x;
        }
        if x < m {
            m = x;
        }
    }
    m
}

/// Sup norm of a sequence of values.
pub fn sup_abs<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut m = T::zero();
    for x in xs {
        let a = x.abs();
        if a.is_nan() {
            return a;
        }
        if a > m {
            m = a;
        }
    }
    m
}
