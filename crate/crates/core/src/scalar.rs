//! Scalar abstraction: the whole crate is generic over the real float type.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar type underlying all amplitudes and parameters (f32 or f64).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Send + Sync + Debug + Display + 'static
{
    /// Convert an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the crate scalar.
pub type C<R> = Complex<R>;

/// `re + i*im` from f64 literals.
pub fn cx<R: Scalar>(re: f64, im: f64) -> C<R> {
    C::new(R::of(re), R::of(im))
}

/// Unit phase `e^{i theta}`.
pub fn phase<R: Scalar>(theta: R) -> C<R> {
    C::from_polar(R::one(), theta)
}

/// Sum of a slice with pairwise (cascade) summation, so results do not depend
/// on how work was chunked by callers.
pub fn pairwise_sum<R: Scalar>(xs: &[R]) -> R {
    if xs.len() <= 8 {
        let mut acc = R::zero();
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_convert() {
        assert_eq!(f64::of(2.5), 2.5);
        assert_eq!(f32::of(0.5), 0.5f32);
        let z: C<f64> = cx(1.0, -2.0);
        assert_eq!(z.re, 1.0);
        assert_eq!(z.im, -2.0);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }
}
