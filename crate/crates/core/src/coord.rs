//! Exact rational coordinates.
//!
//! Every position, length, probability, cost, and ratio in this workspace is
//! a [`Coord`]: a reduced fraction of `i128` integers. Nothing here ever
//! rounds; equality and ordering are exact, which is what makes truthfulness
//! audits and tie-breaking contracts testable at all. Floating point appears
//! only in presentational decimal renderings of reports.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Exact rational number: numerator over strictly positive denominator, in
/// lowest terms.
///
/// The backing range is `i128`; the workspace enables overflow checks in
/// release builds, so exceeding it aborts instead of silently wrapping. The
/// instances this library works with keep numerators and denominators many
/// orders of magnitude below that limit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coord(Ratio<i128>);

/// Error parsing or constructing a [`Coord`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoordError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed number string: {0:?}")]
    Malformed(String),
}

impl Coord {
    /// Builds `numerator / denominator`, reduced. Fails on a zero denominator.
    pub fn new(numerator: i128, denominator: i128) -> Result<Self, CoordError> {
        if denominator == 0 {
            return Err(CoordError::ZeroDenominator);
        }
        Ok(Coord(Ratio::new(numerator, denominator)))
    }

    /// `numerator / denominator` for literal fractions.
    ///
    /// Panics on a zero denominator; intended for constants whose denominator
    /// is known to be non-zero. Use [`Coord::new`] for untrusted input.
    pub fn frac(numerator: i128, denominator: i128) -> Self {
        assert!(denominator != 0, "zero denominator in Coord::frac");
        Coord(Ratio::new(numerator, denominator))
    }

    /// Whole number.
    pub fn int(value: i128) -> Self {
        Coord(Ratio::from_integer(value))
    }

    /// Agent counts and indices as exact values.
    pub fn from_count(value: usize) -> Self {
        Coord(Ratio::from_integer(value as i128))
    }

    pub fn zero() -> Self {
        Coord(Ratio::zero())
    }

    pub fn one() -> Self {
        Coord(Ratio::one())
    }

    pub fn numerator(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Coord(self.0.abs())
    }

    /// Largest integer not greater than the value.
    pub fn floor_int(&self) -> i128 {
        self.0.floor().to_integer()
    }

    /// Smallest integer not smaller than the value.
    pub fn ceil_int(&self) -> i128 {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Reciprocal. Panics on zero, like integer division.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero Coord");
        Coord(self.0.recip())
    }

    /// Decimal rendering for reports.
    ///
    /// Emits the exact value when it terminates within 13 fractional digits,
    /// otherwise truncates after 13 digits, so re-parsing the string yields a
    /// value within 10^-13 of the original. The rational string remains the
    /// authoritative representation everywhere.
    pub fn decimal_string(&self) -> String {
        let sign = if self.is_negative() { "-" } else { "" };
        let num = self.numerator().unsigned_abs();
        let den = self.denominator() as u128;
        let int_part = num / den;
        let mut rem = num % den;
        if rem == 0 {
            return format!("{sign}{int_part}");
        }
        let mut digits = String::new();
        for _ in 0..13 {
            rem *= 10;
            digits.push(char::from(b'0' + (rem / den) as u8));
            rem %= den;
            if rem == 0 {
                break;
            }
        }
        while digits.ends_with('0') {
            digits.pop();
        }
        format!("{sign}{int_part}.{digits}")
    }
}

impl fmt::Display for Coord {
    /// Canonical form: lowest terms, `p/q`, plain integer when `q` is 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Coord {
    type Err = CoordError;

    /// Accepts `p/q` fractions, plain integers, and exact decimals such as
    /// `0.25`. Whitespace is not tolerated; parsing is exact.
    fn from_str(s: &str) -> Result<Self, CoordError> {
        let malformed = || CoordError::Malformed(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: i128 = num.parse().map_err(|_| malformed())?;
            let den: i128 = den.parse().map_err(|_| malformed())?;
            return Coord::new(num, den);
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let negative = int_part.starts_with('-');
            let int: i128 = int_part.parse().map_err(|_| malformed())?;
            let scale = 10_i128
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(malformed)?;
            let frac: i128 = frac_part.parse().map_err(|_| malformed())?;
            let magnitude = int
                .unsigned_abs()
                .checked_mul(scale as u128)
                .and_then(|v| v.checked_add(frac as u128))
                .ok_or_else(malformed)?;
            if magnitude > i128::MAX as u128 {
                return Err(malformed());
            }
            let signed = if negative {
                -(magnitude as i128)
            } else {
                magnitude as i128
            };
            return Coord::new(signed, scale);
        }
        let int: i128 = s.parse().map_err(|_| malformed())?;
        Ok(Coord::int(int))
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Coord {
            type Output = Coord;
            fn $method(self, rhs: Coord) -> Coord {
                Coord($trait::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Coord {
    type Output = Coord;
    fn neg(self) -> Coord {
        Coord(-self.0)
    }
}

impl AddAssign for Coord {
    fn add_assign(&mut self, rhs: Coord) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Coord {
    fn sub_assign(&mut self, rhs: Coord) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Coord {
    fn mul_assign(&mut self, rhs: Coord) {
        self.0 *= rhs.0;
    }
}

impl Sum for Coord {
    fn sum<I: Iterator<Item = Coord>>(iter: I) -> Coord {
        iter.fold(Coord::zero(), |acc, v| acc + v)
    }
}
