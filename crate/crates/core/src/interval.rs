//! Fixed-point real enclosures with outward rounding.
//!
//! A [`RealInterval`] at precision `p` stores two integers `lo`, `hi` and
//! denotes `[lo * 2^-p, hi * 2^-p]`. Every operation rounds the lower end
//! towards -inf and the upper end towards +inf, so the exact value of the
//! quantity being tracked always stays inside.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::rat::{div_ceil, div_floor, format_rat, pow2, rat_to_f64_down, rat_to_f64_up, Rat};

/// Default working precision in fraction bits.
pub const DEFAULT_PRECISION: u32 = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RealInterval {
    lo: BigInt,
    hi: BigInt,
    precision: u32,
}

impl RealInterval {
    /// Builds an interval from raw fixed-point endpoints.
    pub fn from_raw(lo: BigInt, hi: BigInt, precision: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi, precision }
    }

    pub fn zero(precision: u32) -> Self {
        Self::from_raw(BigInt::zero(), BigInt::zero(), precision)
    }

    pub fn from_int(v: i64, precision: u32) -> Self {
        let x = BigInt::from(v) << precision as usize;
        Self::from_raw(x.clone(), x, precision)
    }

    /// Tightest enclosure of `r` at the given precision.
    pub fn from_rat(r: &Rat, precision: u32) -> Self {
        let scaled = r.numer() << precision as usize;
        Self::from_raw(
            div_floor(&scaled, r.denom()),
            div_ceil(&scaled, r.denom()),
            precision,
        )
    }

    /// Enclosure of `[a, b]` for rationals `a <= b`.
    pub fn from_rat_bounds(a: &Rat, b: &Rat, precision: u32) -> Self {
        let lo = Self::from_rat(a, precision).lo;
        let hi = Self::from_rat(b, precision).hi;
        Self::from_raw(lo, hi, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn raw_lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn raw_hi(&self) -> &BigInt {
        &self.hi
    }

    pub fn lo(&self) -> Rat {
        Rat::new(self.lo.clone(), pow2(self.precision))
    }

    pub fn hi(&self) -> Rat {
        Rat::new(self.hi.clone(), pow2(self.precision))
    }

    pub fn width(&self) -> Rat {
        Rat::new(&self.hi - &self.lo, pow2(self.precision))
    }

    /// Largest double not above the lower end.
    pub fn lo_f64(&self) -> f64 {
        rat_to_f64_down(&self.lo())
    }

    /// Smallest double not below the upper end.
    pub fn hi_f64(&self) -> f64 {
        rat_to_f64_up(&self.hi())
    }

    pub fn width_f64(&self) -> f64 {
        rat_to_f64_up(&self.width())
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo_f64() + self.hi_f64())
    }

    pub fn contains_rat(&self, r: &Rat) -> bool {
        self.lo() <= *r && *r <= self.hi()
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &RealInterval) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    /// Rescales to `precision` bits, rounding outward when coarsening.
    pub fn with_precision(&self, precision: u32) -> Self {
        match precision.cmp(&self.precision) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let shift = (precision - self.precision) as usize;
                Self::from_raw(&self.lo << shift, &self.hi << shift, precision)
            }
            Ordering::Less => {
                let d = pow2(self.precision - precision);
                Self::from_raw(
                    div_floor(&self.lo, &d),
                    div_ceil(&self.hi, &d),
                    precision,
                )
            }
        }
    }

    fn aligned(&self, other: &RealInterval) -> (Self, Self) {
        let p = self.precision.min(other.precision);
        (self.with_precision(p), other.with_precision(p))
    }

    pub fn add(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_raw(a.lo + b.lo, a.hi + b.hi, a.precision)
    }

    pub fn sub(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_raw(a.lo - b.hi, a.hi - b.lo, a.precision)
    }

    pub fn neg(&self) -> Self {
        Self::from_raw(-&self.hi, -&self.lo, self.precision)
    }

    /// Product with an exact rational.
    pub fn mul_rat(&self, r: &Rat) -> Self {
        let (a, b) = if r.is_negative() {
            (&self.hi, &self.lo)
        } else {
            (&self.lo, &self.hi)
        };
        let lo = div_floor(&(a * r.numer()), r.denom());
        let hi = div_ceil(&(b * r.numer()), r.denom());
        Self::from_raw(lo, hi, self.precision)
    }

    /// Product of two enclosures.
    pub fn mul(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        let p = a.precision;
        let d = pow2(p);
        let products = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        Self::from_raw(div_floor(min, &d), div_ceil(max, &d), p)
    }

    pub fn div_int(&self, n: u64) -> Self {
        assert!(n > 0, "division by zero");
        let d = BigInt::from(n);
        Self::from_raw(
            div_floor(&self.lo, &d),
            div_ceil(&self.hi, &d),
            self.precision,
        )
    }

    /// Enclosure of `min(x, y)` for `x` in `self`, `y` in `other`.
    pub fn min(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_raw(a.lo.min(b.lo), a.hi.min(b.hi), a.precision)
    }

    /// Enclosure of `max(x, y)`.
    pub fn max(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_raw(a.lo.max(b.lo), a.hi.max(b.hi), a.precision)
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &RealInterval) -> Self {
        let (a, b) = self.aligned(other);
        Self::from_raw(a.lo.min(b.lo), a.hi.max(b.hi), a.precision)
    }

    /// Raises both ends to at least `floor` (valid when the tracked quantity
    /// is known to be `>= floor`).
    pub fn clamp_below(&self, floor: &Rat) -> Self {
        let f = Self::from_rat(floor, self.precision);
        let lo = self.lo.clone().max(f.lo);
        let hi = self.hi.clone().max(lo.clone());
        Self::from_raw(lo, hi, self.precision)
    }

    /// Lowers the upper end to `ceiling.hi` (valid when the tracked
    /// quantity is known to be `<= ceiling`).
    pub fn clamp_above(&self, ceiling: &RealInterval) -> Self {
        let c = ceiling.with_precision(self.precision);
        let hi = self.hi.clone().min(c.hi);
        let lo = self.lo.clone().min(hi.clone());
        Self::from_raw(lo, hi, self.precision)
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.lo.is_negative()
    }
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:e}, {:e}]@{}",
            self.lo_f64(),
            self.hi_f64(),
            self.precision
        )
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo_f64(), self.hi_f64())
    }
}

impl Serialize for RealInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RealInterval", 5)?;
        st.serialize_field("lo", &format_rat(&self.lo()))?;
        st.serialize_field("hi", &format_rat(&self.hi()))?;
        st.serialize_field("precision", &self.precision)?;
        st.serialize_field("lo_f64", &self.lo_f64())?;
        st.serialize_field("hi_f64", &self.hi_f64())?;
        st.end()
    }
}
