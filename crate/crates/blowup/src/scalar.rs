//! Floating-point abstraction: f32 or f64.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type every numeric kernel in this crate is generic over.
///
/// `of` converts an f64 literal into the working precision; it is the
/// only way constants enter generic code.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + core::fmt::Debug + core::fmt::Display + core::iter::Sum + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
