//! Scalar abstractions.
//!
//! Everything numeric in the crate is written against [`Real`] (implemented for
//! `f32` and `f64`) and, for the closed-form Haar averages that are rational
//! expressions, against [`Field`], which additionally admits exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point type the simulator runs on: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Tolerance for structural checks: norms, hermiticity, traces, unitarity.
    fn structural_tol() -> Self;

    /// Eigenvalues below this floor contribute nothing to entropies or ranks.
    fn eigen_floor() -> Self;

    /// Draws one standard normal variate.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Conversion from a count or dimension.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn structural_tol() -> Self {
        1e-10
    }

    #[inline]
    fn eigen_floor() -> Self {
        1e-12
    }

    #[inline]
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f32 {
    #[inline]
    fn structural_tol() -> Self {
        2e-4
    }

    #[inline]
    fn eigen_floor() -> Self {
        1e-7
    }

    #[inline]
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Complex amplitude over a [`Real`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Arithmetic field used by rational closed forms; exact for [`Ratio`].
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn from_u64(v: u64) -> Self;
    fn zero() -> Self {
        Self::from_u64(0)
    }
    fn one() -> Self {
        Self::from_u64(1)
    }
}

impl Field for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }
}

impl Field for f32 {
    fn from_u64(v: u64) -> Self {
        v as f32
    }
}

impl Field for Ratio<i128> {
    fn from_u64(v: u64) -> Self {
        Ratio::from_integer(v as i128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn normals_are_centered() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| f64::sample_normal(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        let m32: f32 = (0..n).map(|_| f32::sample_normal(&mut rng)).sum::<f32>() / n as f32;
        assert!(m32.abs() < 0.03);
    }

    #[test]
    fn rational_field_is_exact() {
        let third = <Ratio<i128> as Field>::one() / <Ratio<i128> as Field>::from_u64(3);
        assert_eq!(third.clone() + third.clone() + third, <Ratio<i128> as Field>::one());
    }
}
