use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used for embeddings, distances and metrics.
///
/// Implemented for `f32` and `f64`. Values crossing a file or wire boundary
/// are carried as `f64` and converted with [`Scalar::of`] / [`Scalar::as_f64`].
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn of_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
