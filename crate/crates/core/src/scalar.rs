//! Scalar abstraction shared by every exact and floating-point routine.
//!
//! The toolkit is written once against [`Scalar`]. Arbitrary-precision
//! rationals give exact answers (zero tolerance everywhere); `f64`/`f32`
//! are supported for quick numerical experiments and compare with a small
//! absolute tolerance instead.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// 2^64 as a `u128`; the exclusive upper end of a uniform 64-bit draw.
pub const UNIT_SCALE: u128 = 1u128 << 64;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + num_traits::Num + Signed + ToPrimitive + Send + Sync + 'static
{
    /// Build `num/den`. `den` must be non-zero.
    fn from_fraction(num: i64, den: i64) -> Self;

    /// Equality as used by invariant checks.
    fn near(&self, other: &Self) -> bool;

    /// Strictly below zero, beyond the scalar's tolerance.
    fn is_below_zero(&self) -> bool;

    /// `floor(self * 2^64)` clamped to `[0, 2^64]`.
    fn unit_threshold(&self) -> u128;

    /// Whether results in this scalar are exact.
    const EXACT: bool;

    fn from_int(n: i64) -> Self {
        Self::from_fraction(n, 1)
    }

    fn is_nonneg(&self) -> bool {
        !self.is_below_zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_fraction(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn near(&self, other: &Self) -> bool {
        self == other
    }

    fn is_below_zero(&self) -> bool {
        self.is_negative()
    }

    fn unit_threshold(&self) -> u128 {
        if !self.is_positive() {
            return 0;
        }
        if *self >= BigRational::one() {
            return UNIT_SCALE;
        }
        let scaled: BigInt = (self.numer() << 64u32) / self.denom();
        // 0 < self < 1 so the quotient fits below 2^64.
        scaled.to_u128().unwrap_or(UNIT_SCALE)
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_fraction(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn near(&self, other: &Self) -> bool {
                (self - other).abs() <= $tol
            }

            fn is_below_zero(&self) -> bool {
                *self < -$tol
            }

            fn unit_threshold(&self) -> u128 {
                if self.is_nan() || *self <= 0.0 {
                    return 0;
                }
                if *self >= 1.0 {
                    return UNIT_SCALE;
                }
                ((*self as f64) * (UNIT_SCALE as f64)) as u128
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

/// Sum a slice of scalars.
pub fn sum<T: Scalar>(values: &[T]) -> T {
    values.iter().cloned().fold(T::zero(), |acc, v| acc + v)
}

pub(crate) fn sum_iter<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

/// Total-variation distance between two float vectors, `½·Σ|a−b|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Exact total-variation distance.
pub fn total_variation_exact<T: Scalar>(a: &[T], b: &[T]) -> T {
    let half = T::from_fraction(1, 2);
    half * sum_iter(a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).abs()))
}
