use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Sample type for waveforms and the filters that act on them.
///
/// Timing metadata (sample rate, start time) stays in `f64` regardless of the
/// sample type so that picosecond edges survive microsecond-long records.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssignOps + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every supported scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("supported scalars convert to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
