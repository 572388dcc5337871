//! Field scalars the sparse kernels are generic over.
//!
//! Factorization and selected inversion only need field arithmetic plus a
//! modulus for pivot checks and drop tolerances, so they are written against
//! [`Scalar`]. Real (`f32`, `f64`) and complex (`Complex<f32>`, `Complex<f64>`)
//! scalars are supported; complex-symmetric matrices use plain transposes,
//! never conjugates.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point type underlying a [`Scalar`].
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` constant, rounding as needed.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A real or complex field element.
pub trait Scalar:
    Copy + PartialEq + Debug + Display + NumAssign + std::ops::Neg<Output = Self> + Sum + Send + Sync + 'static
{
    type Real: Real;

    fn from_real(re: Self::Real) -> Self;

    /// Builds a scalar from real and imaginary parts. Real scalars return
    /// `None` when `im` is nonzero.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;

    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;

    /// Absolute value `|x|`.
    fn modulus(self) -> Self::Real;

    fn is_complex() -> bool;

    fn to_c64(self) -> Complex<f64> {
        Complex::new(
            self.re().as_f64(),
            self.im().as_f64(),
        )
    }

    fn from_f64(x: f64) -> Self {
        Self::from_real(Self::Real::of(x))
    }
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            #[inline]
            fn from_real(re: $t) -> Self {
                re
            }

            fn from_parts(re: $t, im: $t) -> Option<Self> {
                (im == 0.0).then_some(re)
            }

            #[inline]
            fn re(self) -> $t {
                self
            }

            #[inline]
            fn im(self) -> $t {
                0.0
            }

            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }

            fn is_complex() -> bool {
                false
            }
        }
    };
}

macro_rules! impl_complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;

            #[inline]
            fn from_real(re: $t) -> Self {
                Complex::new(re, 0.0)
            }

            fn from_parts(re: $t, im: $t) -> Option<Self> {
                Some(Complex::new(re, im))
            }

            #[inline]
            fn re(self) -> $t {
                self.re
            }

            #[inline]
            fn im(self) -> $t {
                self.im
            }

            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }

            fn is_complex() -> bool {
                true
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);
impl_complex_scalar!(f32);
impl_complex_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_scalars_reject_imaginary_parts() {
        assert_eq!(<f64 as Scalar>::from_parts(1.5, 0.0), Some(1.5));
        assert_eq!(<f64 as Scalar>::from_parts(1.5, 1.0), None);
        assert_eq!(
            <Complex<f64> as Scalar>::from_parts(1.5, 1.0),
            Some(Complex::new(1.5, 1.0))
        );
    }

    #[test]
    fn modulus_matches_norm() {
        assert_eq!(Complex::new(3.0f64, 4.0).modulus(), 5.0);
        assert_eq!((-2.0f32).modulus(), 2.0);
    }
}
