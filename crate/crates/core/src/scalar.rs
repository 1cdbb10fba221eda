//! Floating-point abstraction shared by the geometry and metric code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used for box coordinates, scores and metrics: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in
    /// both supported types, so this never fails.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal fits the scalar type")
    }

    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("count fits the scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
