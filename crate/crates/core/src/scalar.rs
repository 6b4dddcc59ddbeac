//! Scalar abstraction for the numeric kernels.
//!
//! The math in this crate (network kernel, k-means, standard-error formulas)
//! is generic over [`Real`] so it can run at `f32` or `f64`. Everything that
//! touches datasets, wire formats, or training state is pinned to [`Scalar`]
//! (`f64`) at the crate root.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the numeric kernels: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + core::iter::Sum + core::fmt::Debug + core::fmt::Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` literals and tolerances.
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in Real")
    }

    /// Conversion from a count; exact for the sizes this crate handles.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Concrete scalar used by datasets, trainers, and all file formats.
pub type Scalar = f64;
