//! Finite state channels over exact rationals.
//!
//! A channel is the pair of conditional laws `p(y | x, s_prev)` and
//! `q(s_next | x, s_prev)`; one channel use has joint law
//! `p(y, s_next | x, s_prev) = p(y | x, s_prev) q(s_next | x, s_prev)`.
//! Multi-letter laws are built by the forward recursion over the block.
//!
//! Sequences are encoded as base-|alphabet| integers with the first symbol
//! most significant, so `(y_1, ..., y_n)` maps to
//! `y_1 |Y|^(n-1) + ... + y_n`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::matrix::ChannelMatrix;
use crate::rat::{self, format_rat, parse_rat, Rat};

/// Largest block channel (rows * columns) that will be materialized.
pub const MAX_BLOCK_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("{tensor} has negative entry {value} at (outcome={outcome}, x={x}, s={s})")]
    NegativeEntry {
        tensor: &'static str,
        outcome: usize,
        x: usize,
        s: usize,
        value: Rat,
    },
    #[error("{tensor} row (x={x}, s={s}) sums to {sum}, expected 1")]
    RowSum {
        tensor: &'static str,
        x: usize,
        s: usize,
        sum: Rat,
    },
    #[error("parameter out of range: {0}")]
    ParamRange(String),
    #[error("invalid sequence: {0}")]
    Sequence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("block of {0} entries exceeds the enumeration cap")]
    TooLarge(usize),
}

/// Conditional law `f(outcome | x, s)` for every input `x` and previous
/// state `s`; rows are stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CondTensor {
    states: usize,
    inputs: usize,
    outcomes: usize,
    data: Vec<Rat>,
}

impl CondTensor {
    pub fn from_fn(
        states: usize,
        inputs: usize,
        outcomes: usize,
        f: impl Fn(usize, usize, usize) -> Rat,
    ) -> Self {
        let mut data = Vec::with_capacity(states * inputs * outcomes);
        for s in 0..states {
            for x in 0..inputs {
                for o in 0..outcomes {
                    data.push(f(o, x, s));
                }
            }
        }
        Self {
            states,
            inputs,
            outcomes,
            data,
        }
    }

    /// Builds from the nested `[outcome][x][s]` layout of channel files.
    pub fn from_nested(nested: &[Vec<Vec<Rat>>]) -> Result<Self, ChannelError> {
        let outcomes = nested.len();
        let inputs = nested.first().map_or(0, Vec::len);
        let states = nested
            .first()
            .and_then(|v| v.first())
            .map_or(0, Vec::len);
        for (o, plane) in nested.iter().enumerate() {
            if plane.len() != inputs || plane.iter().any(|r| r.len() != states) {
                return Err(ChannelError::Shape(format!(
                    "ragged tensor at outcome index {o}"
                )));
            }
        }
        Ok(Self::from_fn(states, inputs, outcomes, |o, x, s| {
            nested[o][x][s].clone()
        }))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Rat>>> {
        (0..self.outcomes)
            .map(|o| {
                (0..self.inputs)
                    .map(|x| (0..self.states).map(|s| self.get(o, x, s).clone()).collect())
                    .collect()
            })
            .collect()
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn row(&self, x: usize, s: usize) -> &[Rat] {
        let start = (s * self.inputs + x) * self.outcomes;
        &self.data[start..start + self.outcomes]
    }

    pub fn get(&self, outcome: usize, x: usize, s: usize) -> &Rat {
        &self.row(x, s)[outcome]
    }

    /// True when every row is the same for all inputs at each state.
    pub fn is_input_independent(&self) -> bool {
        (0..self.states).all(|s| (1..self.inputs).all(|x| self.row(x, s) == self.row(0, s)))
    }

    /// True when every row is the same for all states at each input.
    pub fn is_state_independent(&self) -> bool {
        (0..self.inputs).all(|x| (1..self.states).all(|s| self.row(x, s) == self.row(x, 0)))
    }

    fn check(&self, tensor: &'static str) -> Result<(), ChannelError> {
        for s in 0..self.states {
            for x in 0..self.inputs {
                let row = self.row(x, s);
                if let Some((o, v)) = row.iter().enumerate().find(|(_, v)| v.is_negative()) {
                    return Err(ChannelError::NegativeEntry {
                        tensor,
                        outcome: o,
                        x,
                        s,
                        value: v.clone(),
                    });
                }
                let sum = rat::sum(row);
                if !sum.is_one() {
                    return Err(ChannelError::RowSum { tensor, x, s, sum });
                }
            }
        }
        Ok(())
    }
}

/// Unvalidated channel description (shapes declared, values untrusted).
#[derive(Debug, Clone)]
pub struct RawFsc {
    pub nx: usize,
    pub ny: usize,
    pub ns: usize,
    pub p: CondTensor,
    pub q: CondTensor,
}

/// A validated finite state channel `{p, q}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FscParams {
    nx: usize,
    ny: usize,
    ns: usize,
    p: CondTensor,
    q: CondTensor,
}

/// Accepts the parameters iff shapes match and both laws are exactly
/// row-stochastic.
pub fn validate(raw: RawFsc) -> Result<FscParams, ChannelError> {
    let RawFsc { nx, ny, ns, p, q } = raw;
    if nx < 2 || ny < 2 || ns < 2 {
        return Err(ChannelError::Shape(format!(
            "alphabet sizes must be at least 2 (got |X|={nx}, |Y|={ny}, |S|={ns})"
        )));
    }
    if (p.states, p.inputs, p.outcomes) != (ns, nx, ny) {
        return Err(ChannelError::Shape(format!(
            "p has shape (y={}, x={}, s={}), expected ({ny}, {nx}, {ns})",
            p.outcomes, p.inputs, p.states
        )));
    }
    if (q.states, q.inputs, q.outcomes) != (ns, nx, ns) {
        return Err(ChannelError::Shape(format!(
            "q has shape (s'={}, x={}, s={}), expected ({ns}, {nx}, {ns})",
            q.outcomes, q.inputs, q.states
        )));
    }
    p.check("p")?;
    q.check("q")?;
    Ok(FscParams { nx, ny, ns, p, q })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelFile {
    nx: usize,
    ny: usize,
    ns: usize,
    p: Vec<Vec<Vec<String>>>,
    q: Vec<Vec<Vec<String>>>,
}

fn parse_nested(
    name: &str,
    nested: &[Vec<Vec<String>>],
) -> Result<Vec<Vec<Vec<Rat>>>, ChannelError> {
    nested
        .iter()
        .enumerate()
        .map(|(o, plane)| {
            plane
                .iter()
                .enumerate()
                .map(|(x, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(s, text)| {
                            parse_rat(text).map_err(|e| {
                                ChannelError::Parse(format!("{name}[{o}][{x}][{s}]: {e}"))
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn format_nested(t: &CondTensor) -> Vec<Vec<Vec<String>>> {
    t.to_nested()
        .iter()
        .map(|plane| {
            plane
                .iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect()
        })
        .collect()
}

impl FscParams {
    pub fn new(p: CondTensor, q: CondTensor) -> Result<Self, ChannelError> {
        validate(RawFsc {
            nx: p.inputs,
            ny: p.outcomes,
            ns: p.states,
            p,
            q,
        })
    }

    /// Parses the JSON channel file format: `p[y][x][s]`, `q[s'][x][s]`,
    /// entries as `"a/b"` strings.
    pub fn from_json_str(text: &str) -> Result<Self, ChannelError> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| ChannelError::Parse(e.to_string()))?;
        let p = CondTensor::from_nested(&parse_nested("p", &file.p)?)?;
        let q = CondTensor::from_nested(&parse_nested("q", &file.q)?)?;
        validate(RawFsc {
            nx: file.nx,
            ny: file.ny,
            ns: file.ns,
            p,
            q,
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = ChannelFile {
            nx: self.nx,
            ny: self.ny,
            ns: self.ns,
            p: format_nested(&self.p),
            q: format_nested(&self.q),
        };
        serde_json::to_string_pretty(&file).expect("channel file serializes")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn p(&self) -> &CondTensor {
        &self.p
    }

    pub fn q(&self) -> &CondTensor {
        &self.q
    }

    /// The output law ignores the state, so every block is a product of
    /// identical memoryless uses.
    pub fn is_state_blind(&self) -> bool {
        self.p.is_state_independent()
    }

    /// SHA-256 of the canonical exact serialization.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(format!("{}|{}|{}", self.nx, self.ny, self.ns));
        for t in [&self.p, &self.q] {
            h.update("|");
            for v in &t.data {
                h.update(format_rat(v));
                h.update(";");
            }
        }
        h.finalize().into()
    }

    fn check_state(&self, s0: usize) -> Result<(), ChannelError> {
        if s0 >= self.ns {
            return Err(ChannelError::Sequence(format!(
                "initial state {s0} outside 0..{}",
                self.ns
            )));
        }
        Ok(())
    }

    fn check_inputs(&self, x_seq: &[usize]) -> Result<(), ChannelError> {
        if x_seq.is_empty() {
            return Err(ChannelError::Sequence("empty input block".into()));
        }
        if let Some(x) = x_seq.iter().find(|&&x| x >= self.nx) {
            return Err(ChannelError::Sequence(format!(
                "input symbol {x} outside 0..{}",
                self.nx
            )));
        }
        Ok(())
    }

    /// One-step factors `p(y|x,s) q(s'|x,s)`, laid out as
    /// `[(s * nx + x) * ny * ns + y * ns + s']`.
    fn step_table(&self) -> Vec<Rat> {
        let mut out = Vec::with_capacity(self.ns * self.nx * self.ny * self.ns);
        for s in 0..self.ns {
            for x in 0..self.nx {
                let prow = self.p.row(x, s);
                let qrow = self.q.row(x, s);
                for py in prow {
                    for qs in qrow {
                        out.push(py * qs);
                    }
                }
            }
        }
        out
    }

    /// Forward recursion: from `p^k(y^k, s_k | ...)` to `p^{k+1}`.
    fn extend(&self, step: &[Rat], table: &[Rat], x: usize) -> Vec<Rat> {
        let (ny, ns) = (self.ny, self.ns);
        let mut next = vec![Rat::zero(); table.len() * ny];
        for (idx, mass) in table.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let (yc, s) = (idx / ns, idx % ns);
            let base = (s * self.nx + x) * ny * ns;
            for y in 0..ny {
                for s_next in 0..ns {
                    let f = &step[base + y * ns + s_next];
                    if !f.is_zero() {
                        next[(yc * ny + y) * ns + s_next] += mass * f;
                    }
                }
            }
        }
        next
    }

    fn initial_table(&self, s0: usize) -> Vec<Rat> {
        let mut t = vec![Rat::zero(); self.ns];
        t[s0] = Rat::one();
        t
    }

    /// Distance between `{self, s0}` and `{other, s0}`:
    /// `max_x sum_y |p1 - p2| + max_x sum_s |q1 - q2|`.
    pub fn distance(&self, other: &FscParams, s0: usize) -> Result<Rat, ChannelError> {
        distance(self, other, s0)
    }
}

/// `p^n(y^n, s_n | x^n, s_0)` for one input block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointBlockLaw {
    n: usize,
    x_seq: Vec<usize>,
    s0: usize,
    ny: usize,
    ns: usize,
    table: Vec<Rat>,
}

impl JointBlockLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_seq(&self) -> &[usize] {
        &self.x_seq
    }

    pub fn s0(&self) -> usize {
        self.s0
    }

    /// Dense table indexed `y_code * |S| + s_n`.
    pub fn table(&self) -> &[Rat] {
        &self.table
    }

    pub fn get(&self, y_seq: &[usize], s_n: usize) -> &Rat {
        &self.table[encode(y_seq, self.ny) * self.ns + s_n]
    }

    /// `p^n(y^n | x^n, s_0)`, summing out the final state.
    pub fn output_marginal(&self) -> Vec<Rat> {
        self.table
            .chunks(self.ns)
            .map(rat::sum)
            .collect()
    }

    /// `q^n(s_n | x^n, s_0)`, summing out the outputs.
    pub fn state_marginal(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.ns];
        for chunk in self.table.chunks(self.ns) {
            for (o, v) in out.iter_mut().zip(chunk) {
                *o += v;
            }
        }
        out
    }
}

/// Base-`radix` code of a sequence, first symbol most significant.
pub fn encode(seq: &[usize], radix: usize) -> usize {
    seq.iter().fold(0, |acc, &v| acc * radix + v)
}

/// Inverse of [`encode`] for a sequence of length `len`.
pub fn decode(mut code: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % radix;
        code /= radix;
    }
    out
}

pub fn joint_block_law(
    fsc: &FscParams,
    x_seq: &[usize],
    s0: usize,
) -> Result<JointBlockLaw, ChannelError> {
    fsc.check_inputs(x_seq)?;
    fsc.check_state(s0)?;
    let size = fsc.ny.checked_pow(x_seq.len() as u32).unwrap_or(usize::MAX);
    if size.saturating_mul(fsc.ns) > MAX_BLOCK_ENTRIES {
        return Err(ChannelError::TooLarge(size.saturating_mul(fsc.ns)));
    }
    let step = fsc.step_table();
    let mut table = fsc.initial_table(s0);
    for &x in x_seq {
        table = fsc.extend(&step, &table, x);
    }
    Ok(JointBlockLaw {
        n: x_seq.len(),
        x_seq: x_seq.to_vec(),
        s0,
        ny: fsc.ny,
        ns: fsc.ns,
        table,
    })
}

/// `p^n(y^n | x^n, s_0)` as a dense vector over output codes.
pub fn output_block_law(
    fsc: &FscParams,
    x_seq: &[usize],
    s0: usize,
) -> Result<Vec<Rat>, ChannelError> {
    Ok(joint_block_law(fsc, x_seq, s0)?.output_marginal())
}

/// `q^n(s_n | x^n, s_0)` through the state-only recursion
/// `q^n(s_n) = sum_{s_{n-1}} q(s_n | x_n, s_{n-1}) q^{n-1}(s_{n-1})`.
pub fn state_kernel(
    fsc: &FscParams,
    x_seq: &[usize],
    s0: usize,
) -> Result<Vec<Rat>, ChannelError> {
    fsc.check_inputs(x_seq)?;
    fsc.check_state(s0)?;
    let mut dist = fsc.initial_table(s0);
    for &x in x_seq {
        dist = step_state(fsc, &dist, x);
    }
    Ok(dist)
}

pub(crate) fn step_state(fsc: &FscParams, dist: &[Rat], x: usize) -> Vec<Rat> {
    let mut next = vec![Rat::zero(); fsc.ns];
    for (s, mass) in dist.iter().enumerate() {
        if mass.is_zero() {
            continue;
        }
        for (n, q) in next.iter_mut().zip(fsc.q.row(x, s)) {
            if !q.is_zero() {
                *n += mass * q;
            }
        }
    }
    next
}

/// The block channel `W(y^n | x^n) = p^n(y^n | x^n, s_0)`, rows in input
/// code order. Shared input prefixes are extended once.
pub fn block_channel(fsc: &FscParams, n: usize, s0: usize) -> Result<ChannelMatrix, ChannelError> {
    if n == 0 {
        return Err(ChannelError::Sequence("block length must be positive".into()));
    }
    fsc.check_state(s0)?;
    let rows = fsc.nx.checked_pow(n as u32);
    let cols = fsc.ny.checked_pow(n as u32);
    let entries = match (rows, cols) {
        (Some(r), Some(c)) => r.checked_mul(c.saturating_mul(fsc.ns)),
        _ => None,
    };
    match entries {
        Some(e) if e <= MAX_BLOCK_ENTRIES => {}
        other => return Err(ChannelError::TooLarge(other.unwrap_or(usize::MAX))),
    }
    let (rows, cols) = (rows.unwrap(), cols.unwrap());
    let step = fsc.step_table();
    let mut out = Vec::with_capacity(rows * cols);
    fill_rows(fsc, &step, &fsc.initial_table(s0), n, &mut out);
    Ok(ChannelMatrix::from_trusted(rows, cols, out))
}

fn fill_rows(fsc: &FscParams, step: &[Rat], table: &[Rat], remaining: usize, out: &mut Vec<Rat>) {
    if remaining == 0 {
        out.extend(table.chunks(fsc.ns).map(rat::sum));
        return;
    }
    for x in 0..fsc.nx {
        let next = fsc.extend(step, table, x);
        fill_rows(fsc, step, &next, remaining - 1, out);
    }
}

pub fn distance(a: &FscParams, b: &FscParams, s0: usize) -> Result<Rat, ChannelError> {
    if (a.nx, a.ny, a.ns) != (b.nx, b.ny, b.ns) {
        return Err(ChannelError::Shape(format!(
            "cannot compare channels with alphabets ({}, {}, {}) and ({}, {}, {})",
            a.nx, a.ny, a.ns, b.nx, b.ny, b.ns
        )));
    }
    a.check_state(s0)?;
    let l1_max = |t1: &CondTensor, t2: &CondTensor| -> Rat {
        (0..a.nx)
            .map(|x| {
                t1.row(x, s0)
                    .iter()
                    .zip(t2.row(x, s0))
                    .fold(Rat::zero(), |acc, (u, v)| acc + (u - v).abs())
            })
            .max()
            .unwrap_or_else(Rat::zero)
    };
    Ok(l1_max(&a.p, &b.p) + l1_max(&a.q, &b.q))
}

fn one() -> Rat {
    Rat::one()
}

fn check_binary_dims(nx: usize, ny: usize, ns: usize) -> Result<(), ChannelError> {
    if nx < 2 || ny < 2 || ns < 2 {
        return Err(ChannelError::Shape(format!(
            "alphabet sizes must be at least 2 (got |X|={nx}, |Y|={ny}, |S|={ns})"
        )));
    }
    Ok(())
}

/// Output law that is noiseless in state 0 and a BSC(eps) in state 1.
/// Extra outputs get probability zero; rows for extra inputs or states put
/// all mass on output 0.
pub fn family_p_padded(
    eps: &Rat,
    nx: usize,
    ny: usize,
    ns: usize,
) -> Result<CondTensor, ChannelError> {
    check_binary_dims(nx, ny, ns)?;
    if !eps.is_positive() || *eps >= Rat::new(1.into(), 2.into()) {
        return Err(ChannelError::ParamRange(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    Ok(CondTensor::from_fn(ns, nx, ny, |y, x, s| {
        if x >= 2 || s >= 2 {
            return if y == 0 { one() } else { Rat::zero() };
        }
        match (s, y) {
            (_, y) if y >= 2 => Rat::zero(),
            (0, y) => {
                if y == x {
                    one()
                } else {
                    Rat::zero()
                }
            }
            (_, y) => {
                if y == x {
                    one() - eps
                } else {
                    eps.clone()
                }
            }
        }
    }))
}

/// State law `q_lambda`: stay with probability `1 - lambda`, flip with
/// probability `lambda`, whatever the input. Extra states get probability
/// zero; rows for extra previous states move to state 0; extra inputs copy
/// input 0 so the law stays input-independent.
pub fn family_qlambda_padded(
    lambda: &Rat,
    nx: usize,
    ns: usize,
) -> Result<CondTensor, ChannelError> {
    check_binary_dims(nx, 2, ns)?;
    if lambda.is_negative() || *lambda > Rat::new(1.into(), 2.into()) {
        return Err(ChannelError::ParamRange(format!(
            "lambda = {lambda} must lie in [0, 1/2]"
        )));
    }
    Ok(CondTensor::from_fn(ns, nx, ns, |s_next, _x, s| {
        if s >= 2 {
            return if s_next == 0 { one() } else { Rat::zero() };
        }
        if s_next >= 2 {
            Rat::zero()
        } else if s_next == s {
            one() - lambda
        } else {
            lambda.clone()
        }
    }))
}

pub fn family_p(eps: &Rat) -> Result<CondTensor, ChannelError> {
    family_p_padded(eps, 2, 2, 2)
}

/// Two absorbing states.
pub fn family_qhat() -> CondTensor {
    family_qlambda_padded(&Rat::zero(), 2, 2).expect("lambda = 0 is in range")
}

pub fn family_qlambda(lambda: &Rat) -> Result<CondTensor, ChannelError> {
    family_qlambda_padded(lambda, 2, 2)
}

/// `q_k = q_lambda` with `lambda = 1 / (k + 1)`.
pub fn family_qk(k: u64) -> Result<CondTensor, ChannelError> {
    if k == 0 {
        return Err(ChannelError::ParamRange("k must be at least 1".into()));
    }
    family_qlambda(&Rat::new(BigInt::one(), BigInt::from(k + 1)))
}

/// Named channel families built from `p` and one of the state laws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    PQhat {
        #[serde(with = "crate::rat::serde_str")]
        eps: Rat,
    },
    PQlambda {
        #[serde(with = "crate::rat::serde_str")]
        eps: Rat,
        #[serde(with = "crate::rat::serde_str")]
        lambda: Rat,
    },
    PQk {
        #[serde(with = "crate::rat::serde_str")]
        eps: Rat,
        k: u64,
    },
}

impl Family {
    pub fn build(&self) -> Result<FscParams, ChannelError> {
        self.build_padded(2, 2, 2)
    }

    pub fn build_padded(&self, nx: usize, ny: usize, ns: usize) -> Result<FscParams, ChannelError> {
        let (eps, lambda) = match self {
            Family::PQhat { eps } => (eps, Rat::zero()),
            Family::PQlambda { eps, lambda } => (eps, lambda.clone()),
            Family::PQk { eps, k } => {
                if *k == 0 {
                    return Err(ChannelError::ParamRange("k must be at least 1".into()));
                }
                (eps, Rat::new(BigInt::one(), BigInt::from(k + 1)))
            }
        };
        FscParams::new(
            family_p_padded(eps, nx, ny, ns)?,
            family_qlambda_padded(&lambda, nx, ns)?,
        )
    }
}
