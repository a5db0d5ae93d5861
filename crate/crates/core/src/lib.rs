//! Certified capacity bounds for finite state channels.
//!
//! Probabilities are exact rationals end to end; information quantities
//! are enclosures with outward rounding, so every reported lower bound is
//! a true lower bound and every upper bound a true upper bound on the
//! quantity named. Logarithms are base 2 throughout (capacities in bits).

pub mod bounds;
pub mod channel;
pub mod indecomp;
pub mod info;
pub mod interval;
pub mod log2;
pub mod matrix;
pub mod rat;

pub use channel::{
    block_channel, distance, joint_block_law, output_block_law, state_kernel, validate, ChannelError,
    CondTensor, Family, FscParams, JointBlockLaw, RawFsc,
};
pub use indecomp::{
    geometric_gap_profile, indecomposable_test, indecomposable_test_with, IndecompError, IndecompOptions,
    IndecompReport, KernelMethod,
};
pub use info::{binary_entropy, entropy, mutual_information, InfoError, InputDistribution};
pub use interval::{RealInterval, DEFAULT_PRECISION};
pub use matrix::ChannelMatrix;
pub use rat::{format_rat, parse_rat, Rat};
pub use bounds::{
    block_bounds, capacity_to_precision, dmc_capacity, effective_limit, max_feasible_stage, sandwich, BoundCertificate,
    BoundReport,
    BoundsEngine, BoundsError, Bracket, LimitOutcome, PrecisionOutcome, SolverConfig, MAX_STAGE,
};
