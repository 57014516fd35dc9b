//! Scalar abstraction shared by the tensor, signature, cumulant and
//! estimator code. Implemented for `f32`, `f64` and exact big rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Field-like scalar used for tensor coefficients and estimator arithmetic.
pub trait Scalar:
    Signed + FromPrimitive + ToPrimitive + Clone + Debug + PartialOrd + Send + Sync + 'static
{
    /// Converts an exact rational weight into this scalar type.
    fn from_rational(r: &BigRational) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Lossy conversion for tolerance checks and reporting.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }
    fn from_int(v: i64) -> Self {
        v as f32
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Exact rational from a small integer ratio.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    let (x, y) = (a.as_f64(), b.as_f64());
    let scale = 1.0f64.max(x.abs()).max(y.abs());
    (x - y).abs() <= tol * scale
}
