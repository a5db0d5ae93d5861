//! Finite-n test of indecomposability: how far apart the state kernels
//! `q^n(. | x^n, s0)` of different initial states can be.
//!
//! Passing at one blocklength is evidence, not proof, of the property for
//! all large n. A sufficient condition used by the named families is a
//! one-step scrambling state law (every row of `q` shares support), which
//! makes the gap contract geometrically.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{decode, joint_block_law, state_kernel, ChannelError, FscParams};
use crate::rat::Rat;

/// Default cap on the number of input sequences enumerated.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

#[derive(Debug, Error)]
pub enum IndecompError {
    #[error("{sequences} input sequences exceed the enumeration cap of {cap}")]
    Budget { sequences: u128, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// How the state kernels are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMethod {
    /// State-only recursion through `q`.
    #[default]
    StateRecursion,
    /// State marginal of the full joint law `p^n(y^n, s_n | x^n, s0)`.
    JointMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndecompOptions {
    pub enumeration_cap: u64,
    pub method: KernelMethod,
}

impl Default for IndecompOptions {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            method: KernelMethod::StateRecursion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapWitness {
    pub s_n: usize,
    pub x_seq: Vec<usize>,
    pub s0: usize,
    pub s0_other: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndecompReport {
    pub n: u32,
    /// `max |q^n(s_n | x^n, s0) - q^n(s_n | x^n, s0')|` over all arguments.
    #[serde(with = "crate::rat::serde_str")]
    pub worst_gap: Rat,
    #[serde(with = "crate::rat::serde_str")]
    pub eps: Rat,
    pub pass: bool,
    pub argmax_witness: GapWitness,
    /// Whether a single input sequence stood in for all of them because
    /// `q` ignores the input.
    pub input_independent: bool,
    pub note: String,
}

/// Largest kernel gap for one input sequence, first maximizer in
/// `(s_n, s0, s0')` order.
fn sequence_gap(
    fsc: &FscParams,
    x_seq: &[usize],
    method: KernelMethod,
) -> Result<(Rat, usize, usize, usize), ChannelError> {
    let kernels = (0..fsc.ns())
        .map(|s0| match method {
            KernelMethod::StateRecursion => state_kernel(fsc, x_seq, s0),
            KernelMethod::JointMarginal => Ok(joint_block_law(fsc, x_seq, s0)?.state_marginal()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = (Rat::zero(), 0, 0, 0);
    for s_n in 0..fsc.ns() {
        let (mut hi, mut lo) = (0, 0);
        for (s0, k) in kernels.iter().enumerate().skip(1) {
            if k[s_n] > kernels[hi][s_n] {
                hi = s0;
            }
            if k[s_n] < kernels[lo][s_n] {
                lo = s0;
            }
        }
        let gap = &kernels[hi][s_n] - &kernels[lo][s_n];
        if gap > best.0 {
            best = (gap, s_n, hi, lo);
        }
    }
    Ok(best)
}

pub fn indecomposable_test(fsc: &FscParams, n: u32, eps: &Rat) -> Result<IndecompReport, IndecompError> {
    indecomposable_test_with(fsc, n, eps, &IndecompOptions::default())
}

pub fn indecomposable_test_with(
    fsc: &FscParams,
    n: u32,
    eps: &Rat,
    opts: &IndecompOptions,
) -> Result<IndecompReport, IndecompError> {
    if n == 0 {
        return Err(IndecompError::InvalidArgument("blocklength must be at least 1".into()));
    }
    if eps.is_negative() || *eps >= Rat::from_integer(1.into()) {
        return Err(IndecompError::InvalidArgument(format!("eps = {eps} must lie in [0, 1)")));
    }
    let input_independent = fsc.q().is_input_independent();
    let sequences: u128 = if input_independent {
        1
    } else {
        (fsc.nx() as u128).checked_pow(n).unwrap_or(u128::MAX)
    };
    if sequences > opts.enumeration_cap as u128 {
        return Err(IndecompError::Budget {
            sequences,
            cap: opts.enumeration_cap,
        });
    }

    let gaps = (0..sequences as usize)
        .into_par_iter()
        .map(|code| sequence_gap(fsc, &decode(code, fsc.nx(), n as usize), opts.method))
        .collect::<Result<Vec<_>, _>>()?;
    // First strict maximum in code order keeps the witness deterministic.
    let mut best_code = 0;
    for (code, g) in gaps.iter().enumerate() {
        if g.0 > gaps[best_code].0 {
            best_code = code;
        }
    }
    let (worst_gap, s_n, s0, s0_other) = gaps[best_code].clone();
    let pass = worst_gap <= *eps;
    Ok(IndecompReport {
        n,
        worst_gap,
        eps: eps.clone(),
        pass,
        argmax_witness: GapWitness {
            s_n,
            x_seq: decode(best_code, fsc.nx(), n as usize),
            s0,
            s0_other,
        },
        input_independent,
        note: format!("evidence at blocklength {n}"),
    })
}

/// `(n, worst_gap)` for `n = 1..=n_max`.
pub fn geometric_gap_profile(fsc: &FscParams, n_max: u32) -> Result<Vec<(u32, Rat)>, IndecompError> {
    (1..=n_max)
        .map(|n| Ok((n, indecomposable_test(fsc, n, &Rat::zero())?.worst_gap)))
        .collect()
}
