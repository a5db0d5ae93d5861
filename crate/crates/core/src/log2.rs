//! Base-2 logarithm of positive rationals with rigorous enclosures.
//!
//! `x = 2^k * m` with `m` reduced to `[3/4, 3/2)`, then
//! `ln m = 2 atanh((m - 1) / (m + 1))` is summed in fixed point. The series
//! argument is at most 1/5, so each term gains more than four bits. Lower
//! and upper partial sums are carried separately with floor/ceil rounding
//! and a geometric tail bound is added to the upper one.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::interval::RealInterval;
use crate::rat::{div_ceil, div_floor, pow2, Rat};

const GUARD_BITS: u32 = 16;

/// Fixed-point enclosure `[lo, hi] * 2^-bits` of `atanh(num / den)` for
/// `0 <= num / den <= 1/3`.
fn atanh_bounds(num: &BigInt, den: &BigInt, bits: u32) -> (BigInt, BigInt) {
    let one = pow2(bits);
    let scaled = num << bits as usize;
    let z_lo = div_floor(&scaled, den);
    let z_hi = div_ceil(&scaled, den);
    let z2_lo = div_floor(&(&z_lo * &z_lo), &one);
    let z2_hi = div_ceil(&(&z_hi * &z_hi), &one);

    let mut p_lo = z_lo;
    let mut p_hi = z_hi;
    let mut s_lo = BigInt::zero();
    let mut s_hi = BigInt::zero();
    let mut j: u64 = 0;
    let one_ulp = BigInt::one();
    while p_hi > one_ulp {
        let d = BigInt::from(2 * j + 1);
        s_lo += div_floor(&p_lo, &d);
        s_hi += div_ceil(&p_hi, &d);
        p_lo = div_floor(&(&p_lo * &z2_lo), &one);
        p_hi = div_ceil(&(&p_hi * &z2_hi), &one);
        j += 1;
    }
    // Remaining terms: sum_{i>=j} z^(2i+1)/(2i+1) <= p_j * 9/8 <= 2 ulp.
    if p_hi.is_positive() {
        s_hi += 2;
    }
    (s_lo, s_hi)
}

fn ln2_bounds(bits: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<Mutex<HashMap<u32, (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&bits) {
        return v.clone();
    }
    let (lo, hi) = atanh_bounds(&BigInt::one(), &BigInt::from(3), bits);
    let v = (lo * 2, hi * 2);
    cache.lock().unwrap().insert(bits, v.clone());
    v
}

/// `floor(log2(a / b))` for positive integers.
fn floor_log2(a: &BigInt, b: &BigInt) -> i64 {
    let mut k = a.bits() as i64 - b.bits() as i64;
    // 2^k <= a/b < 2^(k+1) after at most one correction.
    let below = |k: i64| -> bool {
        if k >= 0 {
            *a < (b << k as usize)
        } else {
            (a << (-k) as usize) < *b
        }
    };
    if below(k) {
        k -= 1;
    }
    k
}

/// Enclosure of `log2(x)` for a positive rational, `precision` fraction bits.
pub fn log2_rat(x: &Rat, precision: u32) -> RealInterval {
    assert!(x.is_positive(), "log2 of a non-positive number");
    let (a, b) = (x.numer(), x.denom());
    let mut k = floor_log2(a, b);
    let (mut u, mut v) = if k >= 0 {
        (a.clone(), b << k as usize)
    } else {
        (a << (-k) as usize, b.clone())
    };
    // m = u/v in [1, 2); fold the top half down to [3/4, 1).
    if &u * 2 >= &v * 3 {
        v <<= 1;
        k += 1;
    }

    let bits = precision + GUARD_BITS;
    let one = pow2(bits);
    let (l2_lo, l2_hi) = ln2_bounds(bits);
    // ln(m) / ln(2) in fixed point.
    let (frac_lo, frac_hi) = if u >= v {
        let (s_lo, s_hi) = atanh_bounds(&(&u - &v), &(&u + &v), bits);
        (
            div_floor(&(s_lo * 2 * &one), &l2_hi),
            div_ceil(&(s_hi * 2 * &one), &l2_lo),
        )
    } else {
        let (s_lo, s_hi) = atanh_bounds(&(&v - &u), &(&u + &v), bits);
        (
            -div_ceil(&(s_hi * 2 * &one), &l2_lo),
            -div_floor(&(s_lo * 2 * &one), &l2_hi),
        )
    };
    let base = BigInt::from(k) << bits as usize;
    u = base.clone() + frac_lo;
    v = base + frac_hi;
    RealInterval::from_raw(u, v, bits).with_precision(precision)
}

/// Enclosure of `log2(n)` for a positive integer.
pub fn log2_int(n: u64, precision: u32) -> RealInterval {
    log2_rat(&Rat::from_integer(BigInt::from(n)), precision)
}
