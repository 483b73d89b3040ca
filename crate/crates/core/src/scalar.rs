//! Floating-point abstraction shared by the generic field and measure code.

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;
use std::fmt::{Debug, Display};

/// Real scalar usable by the field samplers and measure transforms.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + FftNum + Default + Debug + Display + Send + Sync + 'static
{
    /// log2 of the lattice on which stopped-measure gaps are quantized.
    const GAP_QUANTUM_LOG2: i32;

    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const GAP_QUANTUM_LOG2: i32 = -32;
}

impl Scalar for f32 {
    const GAP_QUANTUM_LOG2: i32 = -8;
}
