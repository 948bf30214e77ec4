//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field used by the eigensolvers, transfer matrices and closed forms.
///
/// Implemented for `f32` and `f64`. Integer-valued quantities (vertex
/// counts, multiplicities, branching generations) never go through this
/// trait; they are exact big integers.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 is representable")
    }

    /// Conversion from an integer count.
    fn of_u64(x: u64) -> Self {
        Self::from_u64(x).expect("u64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
