//! Scalar abstraction: amplitude arithmetic works for any IEEE float.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used for amplitudes, angles and costs.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals and RNG draws.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    fn of_u64(x: u64) -> Self {
        Self::from_u64(x).expect("u64 converts to float")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to float")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
