//! Exact-or-approximate scalar values.
//!
//! Systems whose maps are affine admit exact rational arithmetic all the
//! way through: interval endpoints, gap boundaries, cylinder masses and
//! plateau values are then rational numbers, and equality checks are
//! decisive rather than tolerance-based. Everything else runs on `f64`.
//! [`Scalar`] carries both cases through the same code paths so the
//! geometry and measure routines never branch on the number type.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A real number that is either an exact rational or an `f64`.
///
/// Arithmetic between two exact values stays exact; as soon as an
/// approximate operand enters, the result is approximate. Comparisons are
/// always decided exactly: a float compared against a rational is first
/// replaced by the rational it represents (every finite `f64` is one).
///
/// Values are expected to be finite. Comparing a NaN panics, which is
/// intentional: NaN cannot enter through validated constructors, so
/// meeting one indicates a bug rather than bad input.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact rational `num / den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The exact rational value of a finite `f64`. Non-finite input stays
    /// approximate (and will poison comparisons, see type docs).
    pub fn from_f64_exact(x: f64) -> Self {
        match BigRational::from_float(x) {
            Some(r) => Scalar::Exact(r),
            None => Scalar::Approx(x),
        }
    }

    pub fn approx(x: f64) -> Self {
        Scalar::Approx(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(x) => Scalar::Approx(x.abs()),
        }
    }

    pub fn powi(&self, k: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.pow(k as i32)),
            Scalar::Approx(x) => Scalar::Approx(x.powi(k as i32)),
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Midpoint of two values, exact when both operands are.
    pub fn midpoint(a: &Scalar, b: &Scalar) -> Scalar {
        &(a + b) * &Scalar::ratio(1, 2)
    }

    fn cmp_impl(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Approx(a), Scalar::Approx(b)) => a
                .partial_cmp(b)
                .expect("scalar comparison requires finite values"),
            (Scalar::Exact(a), Scalar::Approx(b)) => {
                let b = BigRational::from_float(*b)
                    .expect("scalar comparison requires finite values");
                a.cmp(&b)
            }
            (Scalar::Approx(a), Scalar::Exact(b)) => {
                let a = BigRational::from_float(*a)
                    .expect("scalar comparison requires finite values");
                a.cmp(b)
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.cmp_impl(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp_impl(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        self.cmp_impl(other)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (a, b) => Scalar::Approx(a.to_f64().$method(b.to_f64())),
                }
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(x) => Scalar::Approx(-x),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}
