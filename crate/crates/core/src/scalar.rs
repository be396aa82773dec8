//! Scalar abstraction for the numerical core.
//!
//! Geometry, estimation and rate-fitting are written against this trait so
//! the same code runs in `f32` or `f64`. The crate root exposes concrete
//! aliases; everything downstream of the problem layer uses [`crate::Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` for constants and tolerances.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    fn from_usize_c(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Dot product of two equal-length slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2<S: Scalar>(v: &[S]) -> S {
    dot(v, v).sqrt()
}

/// ℓ1 norm.
pub fn norm1<S: Scalar>(v: &[S]) -> S {
    v.iter().map(|x| x.abs()).sum()
}

/// ℓ∞ norm.
pub fn norm_inf<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |m, x| m.max(x.abs()))
}

/// ℓp norm for the supported exponents (p = 1 or 2).
pub fn norm_p<S: Scalar>(v: &[S], p: u8) -> S {
    match p {
        1 => norm1(v),
        2 => norm2(v),
        _ => unreachable!("unsupported norm exponent {p}"),
    }
}
