//! Scalar abstraction for the planar primitives.
//!
//! Points, polygon clipping and the regression helpers are written against
//! [`Scalar`] so they run on `f32` or `f64`. The tessellation itself is pinned
//! to `f64`: its exact predicates are defined on IEEE doubles.

use std::fmt::Debug;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar: num_traits::Float + num_traits::FromPrimitive + num_traits::NumAssign + Debug + Default + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
