//! Floating-point scalar abstraction shared by the numerical modules.
//!
//! Everything in the kernel, covariance, eigen and PCA layers is written
//! against [`Scalar`], so the same code runs in `f64` (the default used by
//! the experiment) and in `f32` (used for the large dense covariance
//! matrices, where storage dominates).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// A real floating-point scalar (`f32` or `f64`).
///
/// Reductions are carried out in `f64` regardless of the storage type; use
/// [`Scalar::widen`] and [`Scalar::narrow`] at the boundaries.
pub trait Scalar:
    Float + FromPrimitive + Sum + Default + Debug + Display + Send + Sync + sealed::Sealed + 'static
{
    /// Machine epsilon of the storage type, as `f64`.
    const EPSILON_F64: f64;

    fn widen(self) -> f64;

    /// Rounds an `f64` to the storage type.
    fn narrow(v: f64) -> Self;
}

impl Scalar for f32 {
    const EPSILON_F64: f64 = f32::EPSILON as f64;

    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }

    #[inline]
    fn narrow(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    const EPSILON_F64: f64 = f64::EPSILON;

    #[inline]
    fn widen(self) -> f64 {
        self
    }

    #[inline]
    fn narrow(v: f64) -> Self {
        v
    }
}

/// Returns an error naming `what` if any element is NaN or infinite.
pub(crate) fn ensure_finite<T: Scalar>(values: &[T], what: &str) -> crate::Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(crate::Error::invalid(format!(
            "{what}: element {i} is not finite ({})",
            values[i]
        ))),
    }
}
