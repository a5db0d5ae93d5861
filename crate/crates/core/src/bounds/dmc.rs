//! Blahut-Arimoto capacity of a discrete memoryless channel, with the
//! floating point iterate turned into exact certificates at the end.

use serde::Serialize;

use crate::bounds::BoundsError;
use crate::info::{ChannelEntropies, InputDistribution};
use crate::interval::{RealInterval, DEFAULT_PRECISION};
use crate::matrix::ChannelMatrix;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcOptions {
    /// Stop once the duality gap (bits) is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub precision: u32,
}

impl Default for DmcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50_000,
            precision: DEFAULT_PRECISION,
        }
    }
}

/// Floating point Blahut-Arimoto run.
#[derive(Debug, Clone)]
pub struct BaRun {
    pub input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `max_x D(W_x || r) - I(P; W)` at the final iterate, in bits.
    pub gap: f64,
    /// Primal value `I(P_t; W)` in bits, one entry per iterate.
    pub history: Vec<f64>,
}

/// Certified capacity enclosure of a DMC.
#[derive(Debug, Clone, Serialize)]
pub struct DmcCapacity {
    /// Mutual information at `input`; its lower end is a capacity lower bound.
    pub lower: RealInterval,
    /// `max_x D(W_x || output)`; its upper end is a capacity upper bound.
    pub upper: RealInterval,
    pub input: InputDistribution,
    #[serde(with = "crate::rat::serde_str::vec")]
    pub output: Vec<Rat>,
    pub iterations: usize,
}

/// Divergences `D(W_x || r)` in nats for the current output law.
fn divergences(w: &[f64], rows: usize, cols: usize, r: &[f64], out: &mut [f64]) {
    for x in 0..rows {
        let row = &w[x * cols..(x + 1) * cols];
        let mut d = 0.0;
        for (wy, ry) in row.iter().zip(r) {
            if *wy > 0.0 {
                d += wy * (wy / ry).ln();
            }
        }
        out[x] = d;
    }
}

pub(crate) fn output_f64(w: &[f64], rows: usize, cols: usize, px: &[f64], r: &mut [f64]) {
    r.iter_mut().for_each(|v| *v = 0.0);
    for x in 0..rows {
        let p = px[x];
        if p == 0.0 {
            continue;
        }
        for (ry, wy) in r.iter_mut().zip(&w[x * cols..(x + 1) * cols]) {
            *ry += p * wy;
        }
    }
}

const MAX_RELAXATION: f64 = 64.0;

/// `px * exp(mu * (d - max d))`, renormalized.
fn reweight(px: &[f64], d: &[f64], dmax: f64, mu: f64, out: &mut [f64]) {
    let mut total = 0.0;
    for ((o, p), dx) in out.iter_mut().zip(px).zip(d) {
        *o = p * (mu * (dx - dmax)).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// Blahut-Arimoto from the uniform input on a row-major `w`.
///
/// Each step raises the classical multiplicative update to a power
/// `mu >= 1`. A step is kept only if the mutual information goes up;
/// otherwise it is redone with `mu = 1`, which never decreases it. `mu`
/// grows after accepted steps and shrinks after rejected ones.
pub fn blahut_arimoto(w: &[f64], rows: usize, cols: usize, tol: f64, max_iter: usize) -> BaRun {
    let ln2 = std::f64::consts::LN_2;
    let mut px = vec![1.0 / rows as f64; rows];
    let mut next = vec![0.0; rows];
    let mut r = vec![0.0; cols];
    let mut d = vec![0.0; rows];
    let mut d_next = vec![0.0; rows];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut mu = 1.0;

    let primal_at = |px: &[f64], r: &mut [f64], d: &mut [f64]| {
        output_f64(w, rows, cols, px, r);
        divergences(w, rows, cols, r, d);
        px.iter().zip(d.iter()).map(|(p, dx)| p * dx).sum::<f64>()
    };
    let mut primal = primal_at(&px, &mut r, &mut d);
    loop {
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        history.push(primal / ln2);
        let gap = (dmax - primal) / ln2;
        if gap <= tol || iterations >= max_iter {
            return BaRun {
                input: px,
                iterations,
                converged: gap <= tol,
                gap,
                history,
            };
        }
        reweight(&px, &d, dmax, mu, &mut next);
        let mut candidate = primal_at(&next, &mut r, &mut d_next);
        if mu > 1.0 && (candidate < primal || candidate.is_nan()) {
            mu = (mu / 4.0).max(1.0);
            reweight(&px, &d, dmax, 1.0, &mut next);
            candidate = primal_at(&next, &mut r, &mut d_next);
        } else {
            mu = (mu * 2.0).min(MAX_RELAXATION);
        }
        std::mem::swap(&mut px, &mut next);
        std::mem::swap(&mut d, &mut d_next);
        primal = candidate;
        iterations += 1;
    }
}

/// Certifies an arbitrary floating point input law: the lower end is the
/// exact-evaluation MI at the (dyadically rounded) input, the upper end the
/// dual bound at its induced output law.
pub(crate) fn certify(
    ent: &mut ChannelEntropies,
    px: &[f64],
    precision: u32,
) -> Result<DmcCapacity, BoundsError> {
    // Keep every input in the support so the induced output law covers
    // every reachable output and the dual bound stays finite.
    let floored: Vec<f64> = px.iter().map(|p| p.max(f64::MIN_POSITIVE)).collect();
    let input = InputDistribution::from_f64(1, &floored);
    let lower = ent.mutual_information(input.weights())?;
    let output = ent.channel().output_distribution(input.weights());
    let upper = ent
        .dual_bound(&output)?
        .expect("output law of a full-support input covers every reachable output");
    Ok(DmcCapacity {
        lower: lower.with_precision(precision),
        upper: upper.with_precision(precision),
        input,
        output,
        iterations: 0,
    })
}

pub(crate) fn dmc_capacity_with(
    ent: &mut ChannelEntropies,
    w_f64: &[f64],
    opts: &DmcOptions,
) -> Result<DmcCapacity, BoundsError> {
    let (rows, cols) = (ent.channel().inputs(), ent.channel().outputs());
    let run = blahut_arimoto(w_f64, rows, cols, opts.tol, opts.max_iter);
    let mut cap = certify(ent, &run.input, opts.precision)?;
    cap.iterations = run.iterations;
    if !run.converged {
        return Err(BoundsError::Nonconvergence {
            budget: opts.max_iter,
            best: Box::new(cap),
        });
    }
    Ok(cap)
}

/// Capacity enclosure `[lower.lo, upper.hi]` of a DMC.
pub fn dmc_capacity(w: &ChannelMatrix, opts: &DmcOptions) -> Result<DmcCapacity, BoundsError> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(BoundsError::InvalidArgument(format!("tol = {} must be positive", opts.tol)));
    }
    let mut ent = ChannelEntropies::new(w.clone(), opts.precision);
    dmc_capacity_with(&mut ent, &w.to_f64(), opts)
}
