#![allow(dead_code)]

use fsc_capacity::channel::CondTensor;
use fsc_capacity::rat::rat;
use fsc_capacity::{FscParams, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rational law over `k` outcomes with small denominators and
/// occasional zeros.
pub fn random_law(rng: &mut impl Rng, k: usize) -> Vec<Rat> {
    loop {
        let w: Vec<i64> = (0..k)
            .map(|_| if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=9) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|v| rat(v, total)).collect();
        }
    }
}

pub fn random_tensor(rng: &mut impl Rng, states: usize, inputs: usize, outcomes: usize) -> CondTensor {
    let rows: Vec<Vec<Rat>> = (0..inputs * states).map(|_| random_law(rng, outcomes)).collect();
    CondTensor::from_fn(states, inputs, outcomes, |o, x, s| rows[x * states + s][o].clone())
}

pub fn random_fsc(rng: &mut impl Rng, nx: usize, ny: usize, ns: usize) -> FscParams {
    FscParams::new(random_tensor(rng, ns, nx, ny), random_tensor(rng, ns, nx, ns)).unwrap()
}

/// The randomized suite: 50 binary-alphabet, two-state channels.
pub fn binary_suite() -> Vec<FscParams> {
    let mut r = rng(0x5eed);
    (0..50).map(|_| random_fsc(&mut r, 2, 2, 2)).collect()
}

/// `log2(x)` for `x > 0`, computed bit by bit through repeated squaring
/// on a fixed-point mantissa with `work` fraction bits. Returns an
/// approximation with error far below `2^-bits` when `work >= bits + 64`.
pub fn log2_squaring(x: &Rat, bits: u32) -> Rat {
    assert!(x.is_positive());
    let work = bits as usize + 96;
    let (num, den) = (x.numer().clone(), x.denom().clone());
    let mut k = num.bits() as i64 - den.bits() as i64;
    // Normalize so that m = x / 2^k lies in [1, 2).
    let scaled = |k: i64| -> BigInt {
        if k >= 0 {
            (&num << work) / (&den << k as usize)
        } else {
            ((&num << work) << (-k) as usize) / &den
        }
    };
    let one = BigInt::one() << work;
    let mut m = scaled(k);
    while m < one {
        k -= 1;
        m = scaled(k);
    }
    while m >= (&one << 1usize) {
        k += 1;
        m = scaled(k);
    }
    let two = &one << 1usize;
    let mut frac = BigInt::zero();
    for _ in 0..bits {
        m = (&m * &m) >> work;
        frac <<= 1usize;
        if m >= two {
            frac += 1;
            m >>= 1usize;
        }
    }
    Rat::from_integer(BigInt::from(k)) + Rat::new(frac, BigInt::one() << bits as usize)
}

/// `-p log2 p` reference.
pub fn surprisal_ref(p: &Rat, bits: u32) -> Rat {
    if p.is_zero() {
        Rat::zero()
    } else {
        -(p * log2_squaring(p, bits))
    }
}

/// `I(X;Y)` reference from the joint law.
pub fn mutual_information_ref(px: &[Rat], rows: &[Vec<Rat>], bits: u32) -> Rat {
    let ny = rows[0].len();
    let py: Vec<Rat> = (0..ny)
        .map(|y| px.iter().zip(rows).map(|(p, r)| p * &r[y]).sum())
        .collect();
    let mut total = Rat::zero();
    for (p, row) in px.iter().zip(rows) {
        for (w, q) in row.iter().zip(&py) {
            if p.is_zero() || w.is_zero() {
                continue;
            }
            total += p * w * log2_squaring(&(w / q), bits);
        }
    }
    total
}

pub fn mi_f64(px: &[f64], w: &[f64], cols: usize) -> f64 {
    let mut py = vec![0.0; cols];
    for (x, p) in px.iter().enumerate() {
        for y in 0..cols {
            py[y] += p * w[x * cols + y];
        }
    }
    let mut total = 0.0;
    for (x, p) in px.iter().enumerate() {
        for y in 0..cols {
            let v = w[x * cols + y];
            if *p > 0.0 && v > 0.0 {
                total += p * v * (v / py[y]).log2();
            }
        }
    }
    total
}

/// 1 - H_2(1/4) and 1 - H_2(1/8), from a closed-form evaluation at
/// 40 significant digits.
pub const ONE_MINUS_H2_QUARTER: f64 = 0.188_721_875_540_867_14;
pub const ONE_MINUS_H2_EIGHTH: f64 = 0.456_435_556_800_403_6;
pub const H2_QUARTER: f64 = 0.811_278_124_459_132_9;
