//! Pluggable arithmetic: every algorithm in this crate is generic over a
//! [`Scalar`], instantiated either with `f64` (fast, approximate) or with
//! arbitrary-precision rationals (exact).

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};

/// Arbitrary-precision rational scalar.
pub type Rational = BigRational;

/// Which arithmetic a scalar type performs.  Exactness changes behaviour in a
/// few places: equality tests against cut points, whether series `exp`/`log`
/// are allowed to introduce rounding, and how results are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    Float,
    Rational,
}

/// Field operations plus the handful of conversions the algorithms need.
///
/// `PartialOrd` must be a total order on the values actually produced (both
/// `f64` without NaN and `BigRational` satisfy this); germ comparison and
/// preimage sorting rely on it.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Signed
{
    const MODE: ArithmeticMode;

    fn from_int(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy view for reporting and for float-only post-processing
    /// (root finding on rationals still brackets exactly; only display and
    /// pressure logarithms go through `f64`).
    fn to_f64(&self) -> f64;

    /// Nearest representable value to an `f64` (exact for rationals, since
    /// every finite float is a dyadic rational).
    fn from_f64_approx(x: f64) -> Self;

    /// `e^self`, if the type supports it (floats only).
    fn try_exp(&self) -> Option<Self>;

    /// `ln(self)`, if the type supports it (floats only).
    fn try_ln(&self) -> Option<Self>;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn is_exact() -> bool {
        Self::MODE == ArithmeticMode::Rational
    }
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_approx(x: f64) -> Self {
        x
    }

    fn try_exp(&self) -> Option<Self> {
        Some(self.exp())
    }

    fn try_ln(&self) -> Option<Self> {
        Some(self.ln())
    }
}

impl Scalar for BigRational {
    const MODE: ArithmeticMode = ArithmeticMode::Rational;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        // Shift numerator and denominator separately into f64 range (their
        // bit lengths can exceed 1024 for long orbits), then recombine the
        // dropped power of two.
        let num = self.numer();
        let den = self.denom();
        if num.is_zero() {
            return 0.0;
        }
        let ns = (num.bits() as i64 - 900).max(0);
        let ds = (den.bits() as i64 - 900).max(0);
        let n: f64 = (num.clone() >> ns as usize).to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = (den.clone() >> ds as usize).to_string().parse().unwrap_or(f64::NAN);
        (n / d) * 2f64.powi((ns - ds) as i32)
    }

    fn from_f64_approx(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn try_exp(&self) -> Option<Self> {
        None
    }

    fn try_ln(&self) -> Option<Self> {
        None
    }
}
