//! Scalar abstraction for the type-agnostic numerical kernels.
//!
//! Quadrature rules, dense factorizations, closed-form solitons and the
//! finite-difference residual are written once over [`Real`] and
//! instantiated for `f32` and `f64`. The scattering and Hankel pipeline
//! itself runs in `f64` (see the aliases at the crate root).

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar accepted by the generic kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
