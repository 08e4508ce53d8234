use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the optimizer is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Standard normal cumulative distribution function.
    #[inline]
    fn norm_cdf(self) -> Self {
        Self::lit(0.5) * (-self * Self::FRAC_1_SQRT_2()).erfc()
    }

    /// Standard normal density.
    #[inline]
    fn norm_pdf(self) -> Self {
        let inv_sqrt_2pi = Self::FRAC_1_SQRT_2() * Self::FRAC_2_SQRT_PI() * Self::lit(0.5);
        inv_sqrt_2pi * (-self * self * Self::lit(0.5)).exp()
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_helpers() {
        assert!((0.0f64.norm_cdf() - 0.5).abs() < 1e-15);
        assert!((0.0f64.norm_pdf() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((1.959_963_984_540_054f64.norm_cdf() - 0.975).abs() < 1e-12);
        assert!((0.0f32.norm_pdf() - 0.398_942_3).abs() < 1e-6);
    }
}
