//! Deformation groupoids of toric manifolds from Delzant polytopes.
//!
//! Polytopes, arrows and lattices are exact ([`Rational`]). Coefficient
//! evaluation, convolution and matrix work are generic over
//! [`scalar::Real`]; the aliases below fix the scalar to `f64` or `f32`.

pub mod algebra;
pub mod classical;
pub mod cli;
pub mod delzant;
pub mod error;
pub mod expr;
pub mod groupoid;
pub mod intlat;
pub mod matrixrep;
pub mod polytope;
pub mod sample;
pub mod scalar;
pub mod verify;

pub use algebra::AlgebraElement;
pub use error::{Error, Result};
pub use polytope::DelzantPolytope;

pub type Rational = num_rational::BigRational;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type RepMatrix64 = matrixrep::RepMatrix<f64>;
pub type RepMatrix32 = matrixrep::RepMatrix<f32>;
pub type BracketLimit64 = algebra::BracketLimit<f64>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}
