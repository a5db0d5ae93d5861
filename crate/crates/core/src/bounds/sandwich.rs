//! The monotone sandwich
//! `C_lo(M) = max_{n <= 2^M} (C_lo(n) - log|S|/n)` and
//! `C_hi(M) = min_{n <= 2^M} (C_hi(n) + log|S|/n)`,
//! and the precision loop built on it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::block::{block_bounds, reevaluate, BlockBounds, BoundCertificate, SolverConfig};
use crate::bounds::limit::{effective_limit, Bracket, LimitOutcome};
use crate::bounds::BoundsError;
use crate::channel::{FscParams, MAX_BLOCK_ENTRIES};
use crate::interval::RealInterval;
use crate::log2::log2_int;
use crate::rat::Rat;

/// Largest stage accepted (blocklengths up to `2^MAX_STAGE`).
pub const MAX_STAGE: u32 = 20;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub stage: u32,
    /// `value` is `C_lo(M)` clamped to `>= 0`; `n_star` is the maximizing n.
    pub lower: BoundCertificate,
    /// `value` is `C_hi(M)` clamped to `<= log2 min(|X|, |Y|)`.
    pub upper: BoundCertificate,
    /// `upper - lower`.
    pub gap: RealInterval,
}

impl BoundReport {
    pub fn bracket(&self) -> Bracket {
        Bracket {
            lower: self.lower.value.clone(),
            upper: self.upper.value.clone(),
        }
    }

    /// Re-derives both sandwich values from the stored witnesses and checks
    /// that they certify at least what the report claims.
    pub fn verify(&self, fsc: &FscParams, precision: u32) -> Result<bool, BoundsError> {
        let (corr, cap) = (correction_base(fsc, precision), rate_cap(fsc, precision));

        let lo = reevaluate(&self.lower, fsc, precision)?
            .sub(&corr.div_int(self.lower.n_star as u64))
            .clamp_below(&Rat::zero());
        let hi = reevaluate(&self.upper, fsc, precision)?
            .add(&corr.div_int(self.upper.n_star as u64))
            .clamp_above(&cap);

        let lower_ok = lo.lo() >= self.lower.value.lo() - lo.width();
        let upper_ok = hi.hi() <= self.upper.value.hi() + hi.width();
        Ok(lower_ok && upper_ok)
    }
}

fn correction_base(fsc: &FscParams, precision: u32) -> RealInterval {
    log2_int(fsc.ns() as u64, precision)
}

/// `log2 min(|X|, |Y|)`, an a-priori upper bound on any capacity.
fn rate_cap(fsc: &FscParams, precision: u32) -> RealInterval {
    log2_int(fsc.nx().min(fsc.ny()) as u64, precision)
}

/// Largest stage whose blocklengths can all be materialized as block
/// channels. State-blind channels only ever need the one-letter channel.
pub fn max_feasible_stage(fsc: &FscParams) -> u32 {
    if fsc.is_state_blind() {
        return MAX_STAGE;
    }
    let fits = |n: u32| {
        let side = (fsc.nx() as u128 * fsc.ny() as u128).checked_pow(n);
        side.is_some_and(|e| e.saturating_mul(fsc.ns() as u128) <= MAX_BLOCK_ENTRIES as u128)
    };
    (0..MAX_STAGE).take_while(|&m| fits(1 << (m + 1))).count() as u32
}

type CacheKey = ([u8; 32], u32);

/// Sandwich evaluator with a memo of per-blocklength bounds, so stage
/// `M + 1` reuses every blocklength of stage `M`.
pub struct BoundsEngine {
    config: SolverConfig,
    cache: Mutex<HashMap<CacheKey, Arc<BlockBounds>>>,
}

impl BoundsEngine {
    pub fn new(config: SolverConfig) -> Self {
        Self {
            config,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn block_bounds(&self, fsc: &FscParams, n: u32) -> Result<Arc<BlockBounds>, BoundsError> {
        self.block_bounds_keyed(fsc, fsc.digest(), n)
    }

    fn block_bounds_keyed(
        &self,
        fsc: &FscParams,
        digest: [u8; 32],
        n: u32,
    ) -> Result<Arc<BlockBounds>, BoundsError> {
        let key = (digest, n);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let computed = if n > 1 && fsc.is_state_blind() {
            // Per-letter bounds of a state-blind channel do not depend on n.
            let mut b = (*self.block_bounds_keyed(fsc, digest, 1)?).clone();
            b.n = n;
            b.lower.n_star = n;
            b.upper.n_star = n;
            Arc::new(b)
        } else {
            Arc::new(block_bounds(fsc, n, &self.config)?)
        };
        // Concurrent misses compute identical values; the first insert wins.
        let mut cache = self.cache.lock().unwrap();
        Ok(cache.entry(key).or_insert(computed).clone())
    }

    pub fn sandwich(&self, fsc: &FscParams, stage: u32) -> Result<BoundReport, BoundsError> {
        if stage > MAX_STAGE {
            return Err(BoundsError::InvalidArgument(format!(
                "stage {stage} exceeds the maximum of {MAX_STAGE}"
            )));
        }
        let digest = fsc.digest();
        let lengths: Vec<u32> = (1..=1u32 << stage).collect();
        let blocks = lengths
            .par_iter()
            .map(|&n| self.block_bounds_keyed(fsc, digest, n))
            .collect::<Result<Vec<_>, _>>()?;

        let precision = self.config.precision;
        let corr = correction_base(fsc, precision);
        let mut lower: Option<(RealInterval, &BlockBounds)> = None;
        let mut upper: Option<(RealInterval, &BlockBounds)> = None;
        // Index order, first extremum wins.
        for b in &blocks {
            let c = corr.div_int(b.n as u64);
            let lo_n = b.lower.raw.sub(&c);
            let hi_n = b.upper.raw.add(&c);
            lower = Some(match lower {
                Some((v, arg)) => {
                    let merged = v.max(&lo_n);
                    let arg = if lo_n.raw_lo() > v.raw_lo() { b.as_ref() } else { arg };
                    (merged, arg)
                }
                None => (lo_n, b.as_ref()),
            });
            upper = Some(match upper {
                Some((v, arg)) => {
                    let merged = v.min(&hi_n);
                    let arg = if hi_n.raw_hi() < v.raw_hi() { b.as_ref() } else { arg };
                    (merged, arg)
                }
                None => (hi_n, b.as_ref()),
            });
        }
        let (lower_value, lower_block) = lower.expect("at least one blocklength");
        let (upper_value, upper_block) = upper.expect("at least one blocklength");

        let lower_value = lower_value.clamp_below(&Rat::zero());
        let upper_value = upper_value.clamp_above(&rate_cap(fsc, precision));
        let gap = upper_value.sub(&lower_value);

        let mut lower_cert = lower_block.lower.clone();
        lower_cert.value = lower_value;
        let mut upper_cert = upper_block.upper.clone();
        upper_cert.value = upper_value;
        Ok(BoundReport {
            stage,
            lower: lower_cert,
            upper: upper_cert,
            gap,
        })
    }

    /// Iterates the sandwich over stages `0..=budget` until the gap is
    /// below `2^-(target_bits + 2)`. The budget is lowered to
    /// [`max_feasible_stage`] so running out of block size reads as a
    /// partial result rather than an error.
    pub fn capacity_to_precision(
        &self,
        fsc: &FscParams,
        target_bits: u32,
        budget: u32,
    ) -> Result<PrecisionOutcome, BoundsError> {
        let budget = budget.min(max_feasible_stage(fsc));
        let mut last: Option<BoundReport> = None;
        let outcome = effective_limit(
            |m| {
                let report = self.sandwich(fsc, m)?;
                let b = report.bracket();
                last = Some(report);
                Ok(b)
            },
            target_bits,
            budget,
        )?;
        let report = last.expect("at least one stage runs");
        Ok(match outcome {
            LimitOutcome::Converged { interval, stage } => PrecisionOutcome::Converged {
                interval,
                stage,
                report,
            },
            LimitOutcome::Partial { stage, .. } => PrecisionOutcome::Partial { stage, report },
        })
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PrecisionOutcome {
    /// `interval` has width below `2^-target_bits` and contains the capacity.
    Converged {
        interval: RealInterval,
        stage: u32,
        report: BoundReport,
    },
    /// Stage budget exhausted; `report` still brackets the capacity.
    Partial { stage: u32, report: BoundReport },
}

impl PrecisionOutcome {
    pub fn report(&self) -> &BoundReport {
        match self {
            PrecisionOutcome::Converged { report, .. } | PrecisionOutcome::Partial { report, .. } => report,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, PrecisionOutcome::Converged { .. })
    }
}

pub fn sandwich(fsc: &FscParams, stage: u32, cfg: &SolverConfig) -> Result<BoundReport, BoundsError> {
    BoundsEngine::new(*cfg).sandwich(fsc, stage)
}

pub fn capacity_to_precision(
    fsc: &FscParams,
    target_bits: u32,
    budget: u32,
    cfg: &SolverConfig,
) -> Result<PrecisionOutcome, BoundsError> {
    BoundsEngine::new(*cfg).capacity_to_precision(fsc, target_bits, budget)
}
