//! Exact time on an absolute axis.
//!
//! Clock cycles, frame periods and trigger offsets all have different
//! denominators (48 MHz clock, 28 fps, 6 quads, ...). Keeping them as
//! rationals makes "touching" integration windows intersect in exactly
//! zero seconds and makes frame-rate beats exactly periodic.

use alloc::string::String;
use core::fmt::{self, Write as _};
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Rational number used for every exact quantity in the crate.
pub type Rational = Ratio<i128>;

/// A point or span on the time axis, in seconds, held exactly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(Rational);

impl Time {
    pub const ZERO: Time = Time(Ratio::new_raw(0, 1));

    pub fn from_ratio(seconds: Rational) -> Self {
        Time(seconds)
    }

    /// `num / den` seconds. Panics when `den == 0`.
    pub fn from_fraction(num: i128, den: i128) -> Self {
        Time(Ratio::new(num, den))
    }

    pub fn from_secs(secs: i64) -> Self {
        Time(Ratio::from_integer(secs as i128))
    }

    pub fn from_millis(ms: i64) -> Self {
        Time(Ratio::new(ms as i128, 1_000))
    }

    pub fn from_micros(us: i64) -> Self {
        Time(Ratio::new(us as i128, 1_000_000))
    }

    /// `cycles` ticks of a clock running at `clock_hz`.
    pub fn from_cycles(cycles: i128, clock_hz: u64) -> Self {
        Time(Ratio::new(cycles, clock_hz as i128))
    }

    /// Converts through the shortest decimal that round-trips `secs`, so
    /// `0.005` becomes exactly 1/200 s rather than the nearest binary value.
    /// Returns `None` for non-finite input or values too large to hold.
    pub fn from_secs_f64(secs: f64) -> Option<Self> {
        decimal_ratio(secs).map(Time)
    }

    pub fn as_ratio(self) -> Rational {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        ratio_to_f64(self.0)
    }

    /// Nearest whole microsecond, ties away from zero.
    pub fn to_micros_rounded(self) -> i64 {
        let us = self.0 * Ratio::from_integer(1_000_000);
        let rounded = us.round();
        rounded.to_integer() as i64
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(self) -> Self {
        Time(self.0.abs())
    }

    /// `floor(self / period)`. Panics on a zero period.
    pub fn div_floor(self, period: Time) -> i128 {
        (self.0 / period.0).floor().to_integer()
    }

    /// Remainder in `[0, period)` for a positive period.
    pub fn rem_euclid(self, period: Time) -> Time {
        let k = self.div_floor(period);
        self - period * k
    }

    /// `self / other` as an exact ratio.
    pub fn ratio_to(self, other: Time) -> Rational {
        self.0 / other.0
    }
}

impl Default for Time {
    fn default() -> Self {
        Time::ZERO
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} s", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} s", self.as_secs_f64())
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<i128> for Time {
    type Output = Time;
    fn mul(self, rhs: i128) -> Time {
        Time(self.0 * rhs)
    }
}

impl Mul<Rational> for Time {
    type Output = Time;
    fn mul(self, rhs: Rational) -> Time {
        Time(self.0 * rhs)
    }
}

impl Div<i128> for Time {
    type Output = Time;
    fn div(self, rhs: i128) -> Time {
        Time(self.0 / rhs)
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, |a, b| a + b)
    }
}

pub(crate) fn ratio_to_f64(r: Rational) -> f64 {
    // Split off the integer part so huge numerators keep their precision.
    let (q, rem) = r.numer().div_mod_floor(r.denom());
    q as f64 + rem as f64 / *r.denom() as f64
}

/// Exact rational value of the shortest decimal representation of `x`.
pub(crate) fn decimal_ratio(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let mut text = String::new();
    write!(text, "{}", x).ok()?;
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    let mut numer: i128 = 0;
    for ch in int_part.chars().chain(frac_part.chars()) {
        let d = ch.to_digit(10)? as i128;
        numer = numer.checked_mul(10)?.checked_add(d)?;
    }
    let mut denom: i128 = 1;
    for _ in 0..frac_part.len() {
        denom = denom.checked_mul(10)?;
    }
    if negative {
        numer = -numer;
    }
    Some(Ratio::new(numer, denom))
}
