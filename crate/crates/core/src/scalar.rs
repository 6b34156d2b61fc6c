use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;

/// Real scalar the geometry is generic over: plain floats and dual numbers.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Value part, dropping any derivative information.
    fn value(self) -> f64;

    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts into every Scalar")
    }

    /// π at the scalar's own precision.
    fn pi() -> Self {
        Self::cst(std::f64::consts::PI)
    }
}

impl Scalar for f64 {
    fn value(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn value(self) -> f64 {
        self as f64
    }
}

#[inline]
pub(crate) fn c<T: Scalar>(x: f64) -> T {
    T::cst(x)
}
