//! Per-blocklength bound functions
//! `C_lo(n) = (1/n) max_P min_s0 I(P; W_s0)` and
//! `C_hi(n) = (1/n) max_P max_s0 I(P; W_s0)`,
//! where `W_s0` is the `n`-letter channel started in state `s0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::dmc::{self, output_f64, DmcCapacity, DmcOptions};
use crate::bounds::BoundsError;
use crate::channel::{block_channel, FscParams};
use crate::info::{ChannelEntropies, InputDistribution};
use crate::interval::{RealInterval, DEFAULT_PRECISION};
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Blahut-Arimoto duality gap target, in bits.
    pub tol: f64,
    /// Fraction bits of every enclosure.
    pub precision: u32,
    pub max_iter: usize,
    /// Supergradient steps for the max-min problem.
    pub ascent_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            precision: DEFAULT_PRECISION,
            max_iter: 50_000,
            ascent_iters: 500,
        }
    }
}

impl SolverConfig {
    pub(crate) fn dmc_options(&self) -> DmcOptions {
        DmcOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            precision: self.precision,
        }
    }

    pub(crate) fn check(&self) -> Result<(), BoundsError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(BoundsError::InvalidArgument(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputLaw(#[serde(with = "crate::rat::serde_str::vec")] pub Vec<Rat>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// Input law on `X^m`; `m` may be smaller than `n_star` when the
    /// channel is state-blind and blocks factor into single letters.
    Input { distribution: InputDistribution },
    /// One dual output law on `Y^m` per initial state.
    DualOutputs { n: u32, per_state: Vec<OutputLaw> },
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    /// The certified enclosure. For a lower certificate `value.lo` is a
    /// valid lower bound, for an upper one `value.hi` a valid upper bound.
    pub value: RealInterval,
    /// The per-blocklength bound before any correction or clamping.
    pub raw: RealInterval,
    pub n_star: u32,
    pub s0_star: usize,
    pub witness: Witness,
    /// Lower certificates only: `min_s0 (dual bound) / n`, an upper cap on
    /// the max-min value, recorded for diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<RealInterval>,
    /// Lower certificates only: the ascent stopped improving while still
    /// more than `tol` below the cap.
    pub stalled: bool,
}

/// Both bound functions at one blocklength.
#[derive(Debug, Clone, Serialize)]
pub struct BlockBounds {
    pub n: u32,
    pub lower: BoundCertificate,
    pub upper: BoundCertificate,
}

struct StateSolve {
    ent: ChannelEntropies,
    w: Vec<f64>,
    dmc: DmcCapacity,
}

/// Block channel for each initial state, with its Blahut-Arimoto solution.
/// A state-blind channel factors into identical single letters, so only
/// the one-letter channel is solved.
fn solve_states(fsc: &FscParams, n: u32, cfg: &SolverConfig) -> Result<Vec<StateSolve>, BoundsError> {
    cfg.check()?;
    if n == 0 {
        return Err(BoundsError::InvalidArgument("block length must be positive".into()));
    }
    let letters = letters_of(fsc, n) as usize;
    let opts = cfg.dmc_options();
    (0..fsc.ns())
        .into_par_iter()
        .map(|s0| {
            let m = block_channel(fsc, letters, s0)?;
            let w = m.to_f64();
            let mut ent = ChannelEntropies::new(m, cfg.precision);
            let dmc = dmc::dmc_capacity_with(&mut ent, &w, &opts)?;
            Ok(StateSolve { ent, w, dmc })
        })
        .collect()
}

fn letters_of(fsc: &FscParams, n: u32) -> u32 {
    if fsc.is_state_blind() {
        1
    } else {
        n
    }
}

fn upper_from(solves: &[StateSolve], letters: u32, n: u32) -> BoundCertificate {
    let per_state: Vec<RealInterval> = solves
        .iter()
        .map(|s| s.dmc.upper.div_int(letters as u64))
        .collect();
    let value = per_state.iter().skip(1).fold(per_state[0].clone(), |acc, v| acc.max(v));
    let s0_star = per_state
        .iter()
        .position(|v| v.raw_hi() == value.raw_hi())
        .unwrap_or(0);
    BoundCertificate {
        kind: BoundKind::Upper,
        value: value.clone(),
        raw: value,
        n_star: n,
        s0_star,
        witness: Witness::DualOutputs {
            n: letters,
            per_state: solves.iter().map(|s| OutputLaw(s.dmc.output.clone())).collect(),
        },
        cap: None,
        stalled: false,
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// `(min_s I(P; W_s), argmin)` in bits, plus the divergences of the active
/// state (the supergradient up to a constant).
fn maximin_objective(solves: &[StateSolve], px: &[f64], grad: &mut [f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    let mut d = vec![0.0; px.len()];
    for (s, solve) in solves.iter().enumerate() {
        let (rows, cols) = (solve.ent.channel().inputs(), solve.ent.channel().outputs());
        let mut r = vec![0.0; cols];
        output_f64(&solve.w, rows, cols, px, &mut r);
        for (x, dx) in d.iter_mut().enumerate() {
            let row = &solve.w[x * cols..(x + 1) * cols];
            *dx = row
                .iter()
                .zip(&r)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, ry)| w * (w / ry.max(f64::MIN_POSITIVE)).log2())
                .sum();
        }
        let value: f64 = px.iter().zip(&d).map(|(p, dx)| p * dx).sum();
        if value < best.0 {
            best = (value, s);
            grad.copy_from_slice(&d);
        }
    }
    best
}

fn lower_from(
    solves: &mut [StateSolve],
    letters: u32,
    n: u32,
    cfg: &SolverConfig,
) -> Result<BoundCertificate, BoundsError> {
    let rows = solves[0].ent.channel().inputs();
    let mut px = vec![1.0 / rows as f64; rows];
    let mut grad = vec![0.0; rows];
    let mut best_px = px.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut last_gain = 0;
    for t in 0..=cfg.ascent_iters {
        let (value, _) = maximin_objective(solves, &px, &mut grad);
        if value > best_val {
            best_val = value;
            best_px.copy_from_slice(&px);
            last_gain = t;
        }
        if t == cfg.ascent_iters {
            break;
        }
        let step = 1.0 / (rows as f64 * ((t + 1) as f64).sqrt());
        for (p, g) in px.iter_mut().zip(&grad) {
            *p += step * g;
        }
        project_simplex(&mut px);
    }

    let caps: Vec<RealInterval> = solves
        .iter()
        .map(|s| s.dmc.upper.div_int(letters as u64))
        .collect();
    let cap = caps.iter().skip(1).fold(caps[0].clone(), |acc, v| acc.min(v));

    let input = InputDistribution::from_f64(letters, &best_px);
    let per_state = solves
        .iter_mut()
        .map(|s| Ok(s.ent.mutual_information(input.weights())?.div_int(letters as u64)))
        .collect::<Result<Vec<_>, BoundsError>>()?;
    let value = per_state.iter().skip(1).fold(per_state[0].clone(), |acc, v| acc.min(v));
    let s0_star = per_state
        .iter()
        .position(|v| v.raw_lo() == value.raw_lo())
        .unwrap_or(0);
    let quiet_tail = cfg.ascent_iters - last_gain > cfg.ascent_iters / 5;
    let stalled = quiet_tail && cap.mid_f64() - best_val / letters as f64 > cfg.tol;
    Ok(BoundCertificate {
        kind: BoundKind::Lower,
        value: value.clone(),
        raw: value,
        n_star: n,
        s0_star,
        witness: Witness::Input { distribution: input },
        cap: Some(cap),
        stalled,
    })
}

/// Certified `C_hi(n)`. No `log|S|/n` correction is applied here.
pub fn upper_bound_fn(fsc: &FscParams, n: u32, cfg: &SolverConfig) -> Result<BoundCertificate, BoundsError> {
    let solves = solve_states(fsc, n, cfg)?;
    Ok(upper_from(&solves, letters_of(fsc, n), n))
}

/// Certified `C_lo(n)`: the exact evaluation of `min_s0 I / n` at the best
/// supergradient iterate, so it is a lower bound whatever the optimizer did.
pub fn lower_bound_fn(fsc: &FscParams, n: u32, cfg: &SolverConfig) -> Result<BoundCertificate, BoundsError> {
    let mut solves = solve_states(fsc, n, cfg)?;
    let letters = letters_of(fsc, n);
    lower_from(&mut solves, letters, n, cfg)
}

/// Both bound functions, sharing the block channels and solver runs.
pub fn block_bounds(fsc: &FscParams, n: u32, cfg: &SolverConfig) -> Result<BlockBounds, BoundsError> {
    let mut solves = solve_states(fsc, n, cfg)?;
    let letters = letters_of(fsc, n);
    let upper = upper_from(&solves, letters, n);
    let lower = lower_from(&mut solves, letters, n, cfg)?;
    Ok(BlockBounds { n, lower, upper })
}

/// Re-evaluates a certificate's witness from scratch: the max-min mutual
/// information at the stored input law for a lower certificate, the
/// max over states of the dual bound at the stored output laws for an
/// upper one. The result is per letter and uncorrected.
pub fn reevaluate(cert: &BoundCertificate, fsc: &FscParams, precision: u32) -> Result<RealInterval, BoundsError> {
    let per_state = match &cert.witness {
        Witness::Input { distribution } => {
            let m = distribution.block_len();
            (0..fsc.ns())
                .map(|s0| {
                    let w = block_channel(fsc, m as usize, s0)?;
                    let mi = ChannelEntropies::new(w, precision).mutual_information(distribution.weights())?;
                    Ok(mi.div_int(m as u64))
                })
                .collect::<Result<Vec<_>, BoundsError>>()?
        }
        Witness::DualOutputs { n, per_state } => (0..fsc.ns())
            .map(|s0| {
                let w = block_channel(fsc, *n as usize, s0)?;
                let d = ChannelEntropies::new(w, precision)
                    .dual_bound(&per_state[s0].0)?
                    .ok_or_else(|| BoundsError::InvalidArgument("dual witness misses the channel support".into()))?;
                Ok(d.div_int(*n as u64))
            })
            .collect::<Result<Vec<_>, BoundsError>>()?,
    };
    let fold = |f: fn(&RealInterval, &RealInterval) -> RealInterval| {
        per_state.iter().skip(1).fold(per_state[0].clone(), |acc, v| f(&acc, v))
    };
    Ok(match cert.kind {
        BoundKind::Lower => fold(RealInterval::min),
        BoundKind::Upper => fold(RealInterval::max),
    })
}
