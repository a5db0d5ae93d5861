//! Row-stochastic channel matrices over exact rationals.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::info::InfoError;
use crate::rat::Rat;

/// `W(y | x)` stored row by row: `entries[x * outputs + y]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMatrix {
    inputs: usize,
    outputs: usize,
    entries: Vec<Rat>,
}

impl ChannelMatrix {
    /// Validates shape and exact stochasticity of every row.
    pub fn new(inputs: usize, outputs: usize, entries: Vec<Rat>) -> Result<Self, InfoError> {
        if inputs == 0 || outputs == 0 || entries.len() != inputs * outputs {
            return Err(InfoError::ShapeMismatch(format!(
                "{} entries for a {inputs}x{outputs} channel",
                entries.len()
            )));
        }
        let m = Self {
            inputs,
            outputs,
            entries,
        };
        for x in 0..inputs {
            let row = m.row(x);
            if row.iter().any(|v| v.is_negative()) {
                return Err(InfoError::NotADistribution(format!("row {x} has a negative entry")));
            }
            let total = crate::rat::sum(row);
            if total != Rat::from_integer(1.into()) {
                return Err(InfoError::NotADistribution(format!(
                    "row {x} sums to {total}"
                )));
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, InfoError> {
        let inputs = rows.len();
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(InfoError::ShapeMismatch("ragged rows".into()));
        }
        Self::new(inputs, outputs, rows.into_iter().flatten().collect())
    }

    /// Caller guarantees stochastic rows (used for block channels built
    /// from already validated laws).
    pub(crate) fn from_trusted(inputs: usize, outputs: usize, entries: Vec<Rat>) -> Self {
        debug_assert_eq!(entries.len(), inputs * outputs);
        Self {
            inputs,
            outputs,
            entries,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &[Rat] {
        &self.entries[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn get(&self, x: usize, y: usize) -> &Rat {
        &self.entries[x * self.outputs + y]
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    /// Nearest-double copy for the iterative solvers.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|r| r.to_f64().unwrap_or(0.0))
            .collect()
    }

    /// Exact output law `r(y) = sum_x px(x) W(y|x)`.
    pub fn output_distribution(&self, px: &[Rat]) -> Vec<Rat> {
        let mut r = vec![Rat::zero(); self.outputs];
        for (x, p) in px.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (ry, w) in r.iter_mut().zip(self.row(x)) {
                if !w.is_zero() {
                    *ry += p * w;
                }
            }
        }
        r
    }
}
