//! Floating point scalars used on the numeric side of the crate.
//!
//! Everything that decides membership (polytopes, groupoid arrows, lattices)
//! is exact and works on [`Rational`](crate::Rational). Evaluation of
//! coefficient expressions, convolutions, brackets and matrices is generic
//! over [`Real`], implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable for expression evaluation and the algebra layer.
///
/// Linear algebra (nalgebra) and FFT (rustfft) bounds are added locally where
/// needed, since their traits repeat method names of [`Float`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon of the type.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    fn from_i64_exact(x: i64) -> Self {
        <Self as FromPrimitive>::from_i64(x).expect("i64 converts")
    }

    /// Nearest representable value to an exact rational.
    fn from_rational(q: &BigRational) -> Self {
        // to_f64 on big rationals can overflow numerator/denominator separately
        match q.to_f64() {
            Some(v) if v.is_finite() => Self::from_f64_lossy(v),
            _ => {
                let n = bigint_to_f64(q.numer());
                let d = bigint_to_f64(q.denom());
                Self::from_f64_lossy(n / d)
            }
        }
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Lossy conversion of a rational slice.
pub fn rational_point<F: Real>(y: &[BigRational]) -> Vec<F> {
    y.iter().map(F::from_rational).collect()
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn relative_gap<F: Real>(a: Complex<F>, b: Complex<F>) -> F {
    let scale = F::one().max(a.norm()).max(b.norm());
    (a - b).norm() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn huge_rationals_still_convert() {
        let big = BigInt::from(10).pow(400);
        let q = BigRational::new(big.clone() + 1, big * 4);
        let v = f64::from_rational(&q);
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn f32_and_f64_agree_on_simple_values() {
        let q = BigRational::new(3.into(), 8.into());
        assert_eq!(f32::from_rational(&q), 0.375f32);
        assert_eq!(f64::from_rational(&q), 0.375f64);
    }
}
