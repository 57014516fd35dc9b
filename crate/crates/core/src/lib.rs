//! Path signatures, signature moments and cumulants, ordered-partition
//! combinatorics, and polykay estimators of signature cumulants.
//!
//! The numerical core is generic over [`Scalar`]; the aliases below fix the
//! common instantiations.

pub mod combinatorics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod moment_cumulant;
pub mod path_signatures;
pub mod report;
pub mod scalar;
pub mod tensor_algebra;

pub use error::{Error, Result};
pub use num_rational::BigRational as Rational;
pub use scalar::Scalar;
pub use tensor_algebra::{FreeTensor, Word};

/// Double-precision tensor, the default for signatures and estimators.
pub type Tensor = FreeTensor<f64>;
/// Exact rational tensor, used to check identities without rounding.
pub type ExactTensor = FreeTensor<Rational>;
