use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "fsc", version, about = "Certified capacity bounds for finite state channels")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sandwich bounds for a range of stages M (blocklengths up to 2^M).
    Bounds(BoundsArgs),
    /// Iterate stages until the capacity is known to N bits.
    Capacity(CapacityArgs),
    /// Exact worst-case state-kernel gap over a range of blocklengths.
    Indecomp(IndecompArgs),
    /// Brackets of the absorbing and mixing families side by side.
    DemoGap(DemoGapArgs),
    /// Channels approaching the absorbing family: distance, mixing and bounds.
    DemoDiscontinuity(DemoDiscontinuityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    #[value(name = "p-qhat")]
    PQhat,
    #[value(name = "p-qlambda")]
    PQlambda,
    #[value(name = "p-qk")]
    PQk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Named family; parameters come from --eps, --lambda, --k.
    #[arg(long, conflicts_with = "channel")]
    pub family: Option<FamilyName>,
    /// Crossover of the noisy state, as a rational "a/b".
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    /// Flip probability of the state chain (p-qlambda).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Flip probability 1/(k+1) of the state chain (p-qk).
    #[arg(long)]
    pub k: Option<u64>,
    /// Channel JSON file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Blahut-Arimoto duality gap target in bits.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Fraction bits of every enclosure.
    #[arg(long, default_value_t = fsc_capacity::DEFAULT_PRECISION)]
    pub precision: u32,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Stage range "a..b" (inclusive) or a single stage.
    #[arg(long = "M", default_value = "0..2")]
    pub stages: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Target precision in bits.
    #[arg(long = "N", default_value_t = 1)]
    pub bits: u32,
    /// Largest stage to try.
    #[arg(long = "budget-M", default_value_t = 3)]
    pub budget: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IndecompArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Blocklength range "a..b" (inclusive) or a single blocklength.
    #[arg(long, default_value = "1..4")]
    pub n: String,
    /// Pass threshold on the worst gap, as a rational.
    #[arg(long, default_value = "0")]
    pub threshold: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemoGapArgs {
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    /// Flip probability of the mixing channel.
    #[arg(long, default_value = "1/2")]
    pub lambda: String,
    #[arg(long = "M", default_value = "0..3")]
    pub stages: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemoDiscontinuityArgs {
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    /// Comma separated k values.
    #[arg(long, default_value = "1,3,9,99")]
    pub k: String,
    /// Blocklength of the kernel gap column.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Stage of the bound columns.
    #[arg(long = "M", default_value_t = 2)]
    pub stage: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
