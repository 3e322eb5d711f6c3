//! Scalar abstraction for the geometry and registration cores.

use nalgebra::RealField;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable by the geometric core: `f32` or `f64`.
pub trait Real: RealField + Float + FloatConst + FromPrimitive + Copy + Default + 'static {
    /// Lossy conversion from `f64`, for constants and tolerances.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to Real")
    }

    /// Lossy conversion to `f64`, for reporting and indexing.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
