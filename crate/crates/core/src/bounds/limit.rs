//! Limits of monotone bracketing sequences.
//!
//! Given a nondecreasing sequence of lower bounds and a nonincreasing
//! sequence of upper bounds on the same real, the limit is known to
//! `2^-N` as soon as the bracket width drops below `2^-(N+2)`. Past that
//! stage every later bracket is nested inside, so the answer never moves.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::bounds::BoundsError;
use crate::interval::RealInterval;
use crate::rat::Rat;

/// Stage-`M` bracket: `lower.lo` and `upper.hi` are the certified ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bracket {
    pub lower: RealInterval,
    pub upper: RealInterval,
}

impl Bracket {
    /// Upper end of the bracket width, `upper.hi - lower.lo`.
    pub fn width(&self) -> Rat {
        self.upper.hi() - self.lower.lo()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LimitOutcome {
    /// `interval` has width below `2^-N` and contains the limit.
    Converged { interval: RealInterval, stage: u32 },
    /// Budget exhausted; the last bracket still contains the limit.
    Partial { bracket: Bracket, stage: u32 },
}

/// Runs stages `0..=budget` of `stage_fn` until the bracket width is below
/// `2^-(target_bits + 2)`.
pub fn effective_limit<F>(mut stage_fn: F, target_bits: u32, budget: u32) -> Result<LimitOutcome, BoundsError>
where
    F: FnMut(u32) -> Result<Bracket, BoundsError>,
{
    let threshold = Rat::new(BigInt::one(), BigInt::one() << (target_bits as usize + 2));
    let mut prev: Option<Bracket> = None;
    let mut stage = 0;
    loop {
        let b = stage_fn(stage)?;
        if let Some(p) = &prev {
            if b.lower.lo() < p.lower.lo() {
                return Err(BoundsError::MonotonicityViolation {
                    stage,
                    detail: format!("lower bound fell from {} to {}", p.lower.lo(), b.lower.lo()),
                });
            }
            if b.upper.hi() > p.upper.hi() {
                return Err(BoundsError::MonotonicityViolation {
                    stage,
                    detail: format!("upper bound rose from {} to {}", p.upper.hi(), b.upper.hi()),
                });
            }
        }
        if b.width() < threshold {
            let p = b.lower.precision().min(b.upper.precision());
            let lo = b.lower.with_precision(p).raw_lo().clone();
            let hi = b.upper.with_precision(p).raw_hi().clone();
            if lo > hi {
                return Err(BoundsError::InvalidArgument(format!(
                    "crossed bracket at stage {stage}: lower {} above upper {}",
                    b.lower.lo(),
                    b.upper.hi()
                )));
            }
            return Ok(LimitOutcome::Converged {
                interval: RealInterval::from_raw(lo, hi, p),
                stage,
            });
        }
        if stage >= budget {
            return Ok(LimitOutcome::Partial { bracket: b, stage });
        }
        prev = Some(b);
        stage += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn exact(r: Rat) -> RealInterval {
        RealInterval::from_rat(&r, 128)
    }

    fn pow2(m: u32) -> Rat {
        Rat::new(BigInt::one(), BigInt::one() << m as usize)
    }

    #[test]
    fn geometric_pinch() {
        // Width 2^(1-M) < 2^-12 first holds at M = 14.
        let out = effective_limit(
            |m| {
                Ok(Bracket {
                    lower: exact(rat(1, 1) - pow2(m)),
                    upper: exact(rat(1, 1) + pow2(m)),
                })
            },
            10,
            40,
        )
        .unwrap();
        match out {
            LimitOutcome::Converged { interval, stage } => {
                assert_eq!(stage, 14);
                assert!(interval.contains_rat(&rat(1, 1)));
                assert!(interval.width() < pow2(10));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_bracket_is_partial() {
        let out = effective_limit(
            |_| Ok(Bracket { lower: exact(rat(0, 1)), upper: exact(rat(1, 1)) }),
            3,
            10,
        )
        .unwrap();
        assert!(matches!(out, LimitOutcome::Partial { stage: 10, .. }));
    }

    #[test]
    fn regressions_are_reported() {
        let err = effective_limit(
            |m| {
                Ok(Bracket {
                    lower: exact(if m == 2 { rat(0, 1) } else { rat(1, 4) }),
                    upper: exact(rat(1, 1)),
                })
            },
            3,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, BoundsError::MonotonicityViolation { stage: 2, .. }));

        let err = effective_limit(
            |m| Ok(Bracket { lower: exact(rat(0, 1)), upper: exact(rat(1 + m as i64, 1)) }),
            3,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, BoundsError::MonotonicityViolation { stage: 1, .. }));
    }
}
