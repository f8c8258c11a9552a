//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};
use twofloat::TwoFloat;

/// Real field used by meshes, assembly and the eigensolvers.
///
/// Implemented for `f32`, `f64` and the double-double [`TwoFloat`]; the
/// latter is needed for domains whose elements have aspect ratios beyond
/// what `f64` stiffness matrices can resolve (combs with many teeth).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Short name used in reports.
    const NAME: &'static str;

    /// Largest reduced dimension solved by dense factorizations under
    /// automatic route selection.
    const DENSE_LIMIT: usize = 1200;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every Real")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Real")
    }

    /// Unit roundoff used for convergence tests.
    fn eps() -> Self {
        Self::epsilon()
    }

    /// Lossy conversion for reporting.
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact dyadic number `m * 2^e` (exact whenever the mantissa fits).
    fn dyadic(m: i128, e: i32) -> Self {
        let neg = m < 0;
        let mut rest = m.unsigned_abs();
        let mut acc = Self::zero();
        let mut shift = 0i32;
        while rest != 0 {
            let chunk = (rest & ((1u128 << 26) - 1)) as f64;
            acc += Self::of(chunk) * Self::of(2.0).powi(e + shift);
            rest >>= 26;
            shift += 26;
        }
        if neg {
            -acc
        } else {
            acc
        }
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
}

impl Real for f64 {
    const NAME: &'static str = "f64";
}

impl Real for TwoFloat {
    const NAME: &'static str = "double-double";
    const DENSE_LIMIT: usize = 200;

    // `Float::epsilon` on TwoFloat is the smallest positive normal.
    fn eps() -> Self {
        TwoFloat::from(2f64.powi(-104))
    }

    // `FromPrimitive::from_f64` on TwoFloat falls back to integer truncation.
    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn dyadic(m: i128, e: i32) -> Self {
        // TwoFloat::powi loses the low word for large exponents; scale by
        // exact powers of two through the hi/lo pair instead.
        let neg = m < 0;
        let mut rest = m.unsigned_abs();
        let mut acc = TwoFloat::from(0.0);
        let mut shift = 0i32;
        while rest != 0 {
            let chunk = (rest & ((1u128 << 26) - 1)) as f64;
            acc += TwoFloat::from(chunk * 2f64.powi(e + shift));
            rest >>= 26;
            shift += 26;
        }
        if neg {
            -acc
        } else {
            acc
        }
    }
}

/// Sum of an iterator of reals (no `Sum` bound on the trait).
pub fn sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    it.into_iter().fold(T::zero(), |a, b| a + b)
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
