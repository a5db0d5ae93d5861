//! Entropy and mutual information of exact distributions, returned as
//! outward-rounded enclosures. All logarithms are base 2.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::interval::RealInterval;
use crate::log2::log2_rat;
use crate::matrix::ChannelMatrix;
use crate::rat::{self, Rat};

/// Extra fraction bits carried through sums before the final rounding.
const SUM_GUARD: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoError {
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parameter out of range: {0}")]
    ParamRange(String),
}

/// Probability vector over the block input alphabet `X^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDistribution {
    n: u32,
    #[serde(with = "crate::rat::serde_str::vec")]
    weights: Vec<Rat>,
}

impl InputDistribution {
    pub fn new(n: u32, weights: Vec<Rat>) -> Result<Self, InfoError> {
        check_distribution(&weights)?;
        Ok(Self { n, weights })
    }

    pub fn uniform(n: u32, size: usize) -> Self {
        let w = Rat::new(BigInt::one(), BigInt::from(size));
        Self {
            n,
            weights: vec![w; size],
        }
    }

    /// Exact dyadic rounding of a floating point probability vector onto
    /// the grid `k / 2^40`. Strictly positive inputs stay strictly positive
    /// and the largest entry absorbs the rounding residue, so the weights
    /// sum to exactly one.
    pub fn from_f64(n: u32, probs: &[f64]) -> Self {
        const GRID_BITS: u32 = 40;
        let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
        let grid = (1u64 << GRID_BITS) as f64;
        let mut ticks: Vec<i64> = probs
            .iter()
            .map(|&p| {
                let p = p.max(0.0) / total;
                let t = (p * grid).round() as i64;
                if p > 0.0 {
                    t.max(1)
                } else {
                    0
                }
            })
            .collect();
        let argmax = ticks
            .iter()
            .enumerate()
            .max_by_key(|(i, t)| (**t, std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let assigned: i64 = ticks.iter().sum();
        ticks[argmax] += (1i64 << GRID_BITS) - assigned;
        let den = BigInt::one() << GRID_BITS as usize;
        let weights = ticks
            .into_iter()
            .map(|t| Rat::new(BigInt::from(t), den.clone()))
            .collect();
        Self { n, weights }
    }

    pub fn block_len(&self) -> u32 {
        self.n
    }

    pub fn with_block_len(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect()
    }
}

fn check_distribution(dist: &[Rat]) -> Result<(), InfoError> {
    if dist.is_empty() {
        return Err(InfoError::NotADistribution("empty vector".into()));
    }
    if let Some(i) = dist.iter().position(|p| p.is_negative()) {
        return Err(InfoError::NotADistribution(format!("entry {i} is negative")));
    }
    let total = rat::sum(dist);
    if !total.is_one() {
        return Err(InfoError::NotADistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// Memo of `-p log2 p` enclosures, keyed by the exact probability. Block
/// channels repeat the same handful of products many times.
pub(crate) struct SurprisalMemo {
    precision: u32,
    terms: HashMap<Rat, RealInterval>,
    logs: HashMap<Rat, RealInterval>,
}

impl SurprisalMemo {
    pub(crate) fn new(precision: u32) -> Self {
        Self {
            precision,
            terms: HashMap::new(),
            logs: HashMap::new(),
        }
    }

    pub(crate) fn log2(&mut self, p: &Rat) -> RealInterval {
        if let Some(v) = self.logs.get(p) {
            return v.clone();
        }
        let v = log2_rat(p, self.precision);
        self.logs.insert(p.clone(), v.clone());
        v
    }

    /// `-p log2 p`, with `0 log 0 = 0`.
    pub(crate) fn term(&mut self, p: &Rat) -> RealInterval {
        if p.is_zero() {
            return RealInterval::zero(self.precision);
        }
        if let Some(v) = self.terms.get(p) {
            return v.clone();
        }
        let v = self.log2(p).neg().mul_rat(p);
        self.terms.insert(p.clone(), v.clone());
        v
    }

    fn entropy(&mut self, dist: &[Rat]) -> RealInterval {
        dist.iter()
            .fold(RealInterval::zero(self.precision), |acc, p| acc.add(&self.term(p)))
    }
}

/// Enclosure of `H(dist) = -sum p log2 p`.
pub fn entropy(dist: &[Rat], precision: u32) -> Result<RealInterval, InfoError> {
    check_distribution(dist)?;
    let mut memo = SurprisalMemo::new(precision + SUM_GUARD);
    Ok(memo.entropy(dist).with_precision(precision))
}

/// Enclosure of `H_2(x) = H((x, 1 - x))`.
pub fn binary_entropy(x: &Rat, precision: u32) -> Result<RealInterval, InfoError> {
    if x.is_negative() || *x > Rat::one() {
        return Err(InfoError::ParamRange(format!("binary entropy argument {x}")));
    }
    entropy(&[x.clone(), Rat::one() - x], precision)
}

/// Row entropies of a channel, computed once and reused across input
/// distributions.
pub struct ChannelEntropies {
    channel: ChannelMatrix,
    memo: SurprisalMemo,
    rows: Vec<RealInterval>,
    precision: u32,
}

impl ChannelEntropies {
    pub fn new(channel: ChannelMatrix, precision: u32) -> Self {
        let mut memo = SurprisalMemo::new(precision + SUM_GUARD);
        let rows = (0..channel.inputs())
            .map(|x| memo.entropy(channel.row(x)))
            .collect();
        Self {
            channel,
            memo,
            rows,
            precision,
        }
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `H(W(.|x))` at the internal precision.
    pub fn row_entropy(&self, x: usize) -> &RealInterval {
        &self.rows[x]
    }

    fn check_input(&self, px: &[Rat]) -> Result<(), InfoError> {
        if px.len() != self.channel.inputs() {
            return Err(InfoError::ShapeMismatch(format!(
                "input distribution of size {} for a channel with {} inputs",
                px.len(),
                self.channel.inputs()
            )));
        }
        check_distribution(px)
    }

    /// `I(X;Y) = H(Y) - H(Y|X)` with the output law formed exactly.
    pub fn mutual_information(&mut self, px: &[Rat]) -> Result<RealInterval, InfoError> {
        self.check_input(px)?;
        let r = self.channel.output_distribution(px);
        let h_y = self.memo.entropy(&r);
        let h_y_given_x = px
            .iter()
            .zip(&self.rows)
            .filter(|(p, _)| !p.is_zero())
            .fold(RealInterval::zero(self.precision + SUM_GUARD), |acc, (p, h)| {
                acc.add(&h.mul_rat(p))
            });
        Ok(h_y.sub(&h_y_given_x).with_precision(self.precision))
    }

    /// `D(W(.|x) || r)` for every input row, against an arbitrary output law
    /// `r`. `None` marks an infinite divergence (support mismatch).
    pub fn divergences(&mut self, r: &[Rat]) -> Result<Vec<Option<RealInterval>>, InfoError> {
        if r.len() != self.channel.outputs() {
            return Err(InfoError::ShapeMismatch(format!(
                "output law of size {} for a channel with {} outputs",
                r.len(),
                self.channel.outputs()
            )));
        }
        let logs: Vec<Option<RealInterval>> = r
            .iter()
            .map(|ry| (ry.is_positive()).then(|| self.memo.log2(ry)))
            .collect();
        let p = self.precision + SUM_GUARD;
        let mut out = Vec::with_capacity(self.channel.inputs());
        for x in 0..self.channel.inputs() {
            let mut cross = RealInterval::zero(p);
            let mut finite = true;
            for (w, l) in self.channel.row(x).iter().zip(&logs) {
                if w.is_zero() {
                    continue;
                }
                match l {
                    Some(l) => cross = cross.add(&l.neg().mul_rat(w)),
                    None => {
                        finite = false;
                        break;
                    }
                }
            }
            out.push(finite.then(|| cross.sub(&self.rows[x]).with_precision(self.precision)));
        }
        Ok(out)
    }

    /// Dual (Gallager) upper bound `max_x D(W(.|x) || r) >= max_P I(P; W)`,
    /// valid for any output law `r`. Returns the enclosure of the maximum.
    pub fn dual_bound(&mut self, r: &[Rat]) -> Result<Option<RealInterval>, InfoError> {
        let divs = self.divergences(r)?;
        let mut best: Option<RealInterval> = None;
        for d in divs {
            let d = match d {
                Some(d) => d,
                None => return Ok(None),
            };
            best = Some(match best {
                Some(b) => b.max(&d),
                None => d,
            });
        }
        Ok(best)
    }
}

/// Enclosure of `I(X;Y)` for input law `px` through channel `w`.
pub fn mutual_information(
    px: &InputDistribution,
    w: &ChannelMatrix,
    precision: u32,
) -> Result<RealInterval, InfoError> {
    ChannelEntropies::new(w.clone(), precision).mutual_information(px.weights())
}
