//! Floating-point scalar abstraction: all signal math is generic over f32/f64.

use std::fmt::Display;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Scalar type for signals, spectra and metrics. Implemented by `f32` and `f64`.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + Sum + FftNum + Display + Default
{
    /// Conversion from an f64 constant. Panics on non-representable values,
    /// which cannot happen for finite constants and f32/f64.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + Sum + FftNum + Display + Default
{
}

/// All dB-valued ratios are capped to this magnitude so that exact
/// reconstructions stay finite and sortable.
pub const DB_CAP: f64 = 300.0;

/// 10·log10(power_ratio), capped to ±[`DB_CAP`]. Non-positive ratios map to
/// the negative cap.
pub fn db_capped<T: Scalar>(power_ratio: T) -> T {
    let cap = T::of(DB_CAP);
    if !(power_ratio > T::zero()) {
        return -cap;
    }
    let db = T::of(10.0) * power_ratio.log10();
    if db > cap {
        cap
    } else if db < -cap {
        -cap
    } else {
        db
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_capped_basics() {
        assert_eq!(db_capped(0.0f64), -300.0);
        assert_eq!(db_capped(f64::INFINITY), 300.0);
        assert!((db_capped(10.0f64) - 10.0).abs() < 1e-12);
        assert!((db_capped(0.1f64) + 10.0).abs() < 1e-12);
        assert_eq!(db_capped(1e-40f32), -300.0);
    }
}
