//! Numeric abstraction shared by the loss, exact and oracle layers.
//!
//! Every formula in this crate is written once against [`Scalar`]. Exact
//! checks instantiate it with [`BigRational`] so identities hold with zero
//! error; large-scale runs use `f64`.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// A field-like number type usable for weights, probabilities and losses.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// `num / den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn to_f64(&self) -> f64;

    /// Nearest representable value (exact binary expansion for rationals).
    fn from_f64(x: f64) -> Self;

    /// True when arithmetic is exact (no rounding).
    fn is_exact() -> bool;

    /// Equality up to the type's rounding: exact for rationals, a relative
    /// tolerance of 1e-9 for floats.
    fn near(&self, other: &Self) -> bool;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                assert!(den != 0, "zero denominator");
                num as $t / den as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn from_f64(x: f64) -> Self {
                x as $t
            }

            fn is_exact() -> bool {
                false
            }

            fn near(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                (self - other).abs() <= $tol * scale
            }
        }
    };
}

float_scalar!(f32, 1e-5);
float_scalar!(f64, 1e-9);

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }

    fn is_exact() -> bool {
        true
    }

    fn near(&self, other: &Self) -> bool {
        self == other
    }
}

/// A rational in any scalar type: exact when numerator and denominator fit
/// in `i64`, otherwise through `f64`.
pub fn from_rational<T: Scalar>(q: &BigRational) -> T {
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(a), Some(b)) => T::from_ratio(a, b),
        _ => T::from_f64(Scalar::to_f64(q)),
    }
}

/// `n choose 2` in the scalar type.
pub fn binomial2<T: Scalar>(n: usize) -> T {
    if n < 2 {
        T::zero()
    } else {
        T::from_usize(n * (n - 1) / 2)
    }
}

/// Parse `"p/q"`, `"p"` or a decimal literal into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<BigRational>() {
        return Some(r);
    }
    // decimal fallback, e.g. "0.25"
    let (int, frac) = s.split_once('.')?;
    let neg = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches('-'), frac);
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}
