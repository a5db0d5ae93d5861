//! Capacity bounds: single-letter capacity, the per-blocklength bound
//! functions, the monotone sandwich and the anytime precision loop.

pub mod block;
pub mod dmc;
pub mod limit;
pub mod sandwich;

use thiserror::Error;

use crate::channel::ChannelError;
use crate::info::InfoError;

pub use block::{
    block_bounds, lower_bound_fn, reevaluate, upper_bound_fn, BlockBounds, BoundCertificate,
    BoundKind, OutputLaw, SolverConfig, Witness,
};
pub use dmc::{blahut_arimoto, dmc_capacity, BaRun, DmcCapacity, DmcOptions};
pub use limit::{effective_limit, Bracket, LimitOutcome};
pub use sandwich::{
    capacity_to_precision, max_feasible_stage, sandwich, BoundReport, BoundsEngine, PrecisionOutcome, MAX_STAGE,
};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("Blahut-Arimoto did not reach the tolerance within {budget} iterations")]
    Nonconvergence {
        budget: usize,
        best: Box<dmc::DmcCapacity>,
    },
    #[error("monotonicity violated at stage {stage}: {detail}")]
    MonotonicityViolation { stage: u32, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
