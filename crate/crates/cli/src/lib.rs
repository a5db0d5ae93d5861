//! Batch front-end: channel ingestion, the named channel families, and
//! CSV/JSON emission of bounds, precision runs and mixing diagnostics.
//!
//! Every command renders its whole output to a string before anything is
//! written, so output does not depend on the worker count.

mod args;

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fsc_capacity::rat::format_rat;
use fsc_capacity::{
    distance, indecomposable_test, max_feasible_stage, parse_rat, BoundReport, BoundsEngine, BoundsError, Family,
    FscParams, PrecisionOutcome, Rat, RealInterval, SolverConfig, MAX_STAGE,
};
use rayon::prelude::*;
use serde::Serialize;

pub use args::{
    BoundsArgs, CapacityArgs, ChannelArgs, Cli, Command, DemoDiscontinuityArgs, DemoGapArgs, FamilyName, Format,
    IndecompArgs, OutputArgs, SolverArgs,
};

/// Whether a command finished everything it was asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// A stage budget or block size limit cut the run short.
    Partial,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub body: String,
    pub status: Status,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
}

impl Rendered {
    fn complete(body: String) -> Self {
        Self { body, status: Status::Complete, notes: Vec::new() }
    }
}

pub fn parse_rational(flag: &str, text: &str) -> Result<Rat> {
    parse_rat(text).map_err(|e| anyhow!("--{flag} {text:?}: {e}"))
}

/// "a..b" (inclusive) or "a".
pub fn parse_range(flag: &str, text: &str) -> Result<Vec<u32>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| anyhow!("--{flag} {text:?}: expected \"a..b\" or a non-negative integer"))
    };
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if a > b {
        bail!("--{flag} {text:?}: empty range");
    }
    Ok((a..=b).collect())
}

fn parse_k_list(text: &str) -> Result<Vec<u64>> {
    let ks = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| anyhow!("--k {text:?}: expected a comma separated list of integers >= 1"))
        })
        .collect::<Result<Vec<_>>>()?;
    if ks.is_empty() {
        bail!("--k: empty list");
    }
    Ok(ks)
}

pub fn load_channel(args: &ChannelArgs) -> Result<FscParams> {
    match (&args.channel, args.family) {
        (Some(path), _) => read_channel(path),
        (None, Some(name)) => {
            let eps = parse_rational("eps", &args.eps)?;
            let family = match name {
                FamilyName::PQhat => Family::PQhat { eps },
                FamilyName::PQlambda => {
                    let lambda = args.lambda.as_deref().ok_or_else(|| anyhow!("p-qlambda needs --lambda"))?;
                    Family::PQlambda { eps, lambda: parse_rational("lambda", lambda)? }
                }
                FamilyName::PQk => Family::PQk { eps, k: args.k.ok_or_else(|| anyhow!("p-qk needs --k"))? },
            };
            Ok(family.build()?)
        }
        (None, None) => bail!("give a channel with --family or --channel"),
    }
}

fn read_channel(path: &Path) -> Result<FscParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FscParams::from_json_str(&text).with_context(|| format!("invalid channel in {}", path.display()))
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig> {
    if !args.tol.is_finite() || args.tol <= 0.0 {
        bail!("--tol {} must be a positive number", args.tol);
    }
    if args.precision == 0 {
        bail!("--precision must be positive");
    }
    Ok(SolverConfig { tol: args.tol, precision: args.precision, ..SolverConfig::default() })
}

fn check_stages(stages: &[u32]) -> Result<()> {
    if let Some(&m) = stages.iter().find(|&&m| m > MAX_STAGE) {
        bail!("--M {m} exceeds the largest supported stage {MAX_STAGE}");
    }
    Ok(())
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    Ok(String::from_utf8(bytes)?)
}

fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn f(x: f64) -> String {
    format!("{x}")
}

const BOUNDS_HEADER: [&str; 8] =
    ["M", "lower_lo", "lower_hi", "upper_lo", "upper_hi", "gap_hi", "n_star_lower", "n_star_upper"];

fn bounds_row(r: &BoundReport) -> [String; 8] {
    [
        r.stage.to_string(),
        f(r.lower.value.lo_f64()),
        f(r.lower.value.hi_f64()),
        f(r.upper.value.lo_f64()),
        f(r.upper.value.hi_f64()),
        f(r.gap.hi_f64()),
        r.lower.n_star.to_string(),
        r.upper.n_star.to_string(),
    ]
}

/// Reports for the requested stages, stopping where block channels no
/// longer fit.
fn stage_reports(engine: &BoundsEngine, fsc: &FscParams, stages: &[u32]) -> Result<(Vec<BoundReport>, Vec<String>)> {
    check_stages(stages)?;
    let feasible = max_feasible_stage(fsc);
    let mut notes = Vec::new();
    let mut reports = Vec::new();
    for &m in stages {
        if m > feasible {
            notes.push(format!(
                "stopped before M = {m}: block channels beyond M = {feasible} exceed the size cap"
            ));
            break;
        }
        reports.push(engine.sandwich(fsc, m)?);
    }
    Ok((reports, notes))
}

pub fn run_bounds(args: &BoundsArgs) -> Result<Rendered> {
    let fsc = load_channel(&args.channel)?;
    let engine = BoundsEngine::new(solver_config(&args.solver)?);
    let stages = parse_range("M", &args.stages)?;
    let (reports, notes) = stage_reports(&engine, &fsc, &stages)?;
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_string(&BOUNDS_HEADER, |w| {
            for r in &reports {
                w.write_record(bounds_row(r))?;
            }
            Ok(())
        })?,
        Format::Json => json_string(&reports)?,
    };
    let status = if notes.is_empty() { Status::Complete } else { Status::Partial };
    Ok(Rendered { body, status, notes })
}

#[derive(Serialize)]
struct StageSummary {
    #[serde(rename = "M")]
    stage: u32,
    lower: RealInterval,
    upper: RealInterval,
    gap: RealInterval,
    n_star_lower: u32,
    n_star_upper: u32,
}

impl From<&BoundReport> for StageSummary {
    fn from(r: &BoundReport) -> Self {
        Self {
            stage: r.stage,
            lower: r.lower.value.clone(),
            upper: r.upper.value.clone(),
            gap: r.gap.clone(),
            n_star_lower: r.lower.n_star,
            n_star_upper: r.upper.n_star,
        }
    }
}

#[derive(Serialize)]
struct CapacityRecord<'a> {
    status: &'static str,
    /// Converged: width below 2^-N. Partial: the last bracket.
    interval: RealInterval,
    target_bits: u32,
    budget_m: u32,
    final_stage: u32,
    stages: Vec<StageSummary>,
    report: &'a BoundReport,
}

pub fn run_capacity(args: &CapacityArgs) -> Result<Rendered> {
    if args.output.format == Some(Format::Csv) {
        bail!("capacity writes a single JSON record; drop --format csv");
    }
    let fsc = load_channel(&args.channel)?;
    let engine = BoundsEngine::new(solver_config(&args.solver)?);
    if args.budget > MAX_STAGE {
        bail!("--budget-M {} exceeds the largest supported stage {MAX_STAGE}", args.budget);
    }
    let outcome = engine.capacity_to_precision(&fsc, args.bits, args.budget)?;
    let report = outcome.report();
    // Earlier stages come from the engine's cache.
    let stages = (0..=report.stage)
        .map(|m| engine.sandwich(&fsc, m).map(|r| StageSummary::from(&r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut notes = Vec::new();
    let (status, interval) = match &outcome {
        PrecisionOutcome::Converged { interval, .. } => ("converged", interval.clone()),
        PrecisionOutcome::Partial { stage, report } => {
            if *stage < args.budget {
                notes.push(format!("budget lowered to M = {stage}: larger blocks exceed the size cap"));
            }
            ("partial", report.lower.value.hull(&report.upper.value))
        }
    };
    let record = CapacityRecord {
        status,
        interval,
        target_bits: args.bits,
        budget_m: args.budget,
        final_stage: report.stage,
        stages,
        report,
    };
    let status = if outcome.is_converged() { Status::Complete } else { Status::Partial };
    Ok(Rendered { body: json_string(&record)?, status, notes })
}

pub fn run_indecomp(args: &IndecompArgs) -> Result<Rendered> {
    let fsc = load_channel(&args.channel)?;
    let threshold = parse_rational("threshold", &args.threshold)?;
    let ns = parse_range("n", &args.n)?;
    let reports = ns
        .iter()
        .map(|&n| indecomposable_test(&fsc, n, &threshold))
        .collect::<Result<Vec<_>, _>>()?;
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_string(
            &["n", "worst_gap", "worst_gap_f64", "pass", "s_n", "x_seq", "s0", "s0_other", "note"],
            |w| {
                for r in &reports {
                    let x: Vec<String> = r.argmax_witness.x_seq.iter().map(|x| x.to_string()).collect();
                    w.write_record([
                        r.n.to_string(),
                        format_rat(&r.worst_gap),
                        f(fsc_capacity::rat::rat_to_f64_up(&r.worst_gap)),
                        r.pass.to_string(),
                        r.argmax_witness.s_n.to_string(),
                        x.join(" "),
                        r.argmax_witness.s0.to_string(),
                        r.argmax_witness.s0_other.to_string(),
                        r.note.clone(),
                    ])?;
                }
                Ok(())
            },
        )?,
        Format::Json => json_string(&reports)?,
    };
    Ok(Rendered::complete(body))
}

pub fn run_demo_gap(args: &DemoGapArgs) -> Result<Rendered> {
    let eps = parse_rational("eps", &args.eps)?;
    let lambda = parse_rational("lambda", &args.lambda)?;
    let channels = [
        ("p-qhat".to_string(), Family::PQhat { eps: eps.clone() }.build()?),
        (format!("p-qlambda({})", format_rat(&lambda)), Family::PQlambda { eps, lambda }.build()?),
    ];
    let engine = BoundsEngine::new(solver_config(&args.solver)?);
    let stages = parse_range("M", &args.stages)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (name, fsc) in &channels {
        let (reports, n) = stage_reports(&engine, fsc, &stages)?;
        notes.extend(n.into_iter().map(|n| format!("{name}: {n}")));
        rows.extend(reports.into_iter().map(|r| (name.clone(), r)));
    }
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_string(&["channel", "M", "lower_lo", "upper_hi", "gap_lo", "gap_hi"], |w| {
            for (name, r) in &rows {
                w.write_record([
                    name.clone(),
                    r.stage.to_string(),
                    f(r.lower.value.lo_f64()),
                    f(r.upper.value.hi_f64()),
                    f(r.gap.lo_f64()),
                    f(r.gap.hi_f64()),
                ])?;
            }
            Ok(())
        })?,
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                channel: &'a str,
                #[serde(flatten)]
                summary: StageSummary,
            }
            let out: Vec<Row> =
                rows.iter().map(|(c, r)| Row { channel: c, summary: StageSummary::from(r) }).collect();
            json_string(&out)?
        }
    };
    let status = if notes.is_empty() { Status::Complete } else { Status::Partial };
    Ok(Rendered { body, status, notes })
}

#[derive(Serialize)]
struct DiscontinuityRow {
    k: String,
    #[serde(with = "fsc_capacity::rat::serde_str")]
    distance: Rat,
    #[serde(with = "fsc_capacity::rat::serde_str")]
    indecomp_gap: Rat,
    lower: RealInterval,
    upper: RealInterval,
}

pub fn run_demo_discontinuity(args: &DemoDiscontinuityArgs) -> Result<Rendered> {
    let eps = parse_rational("eps", &args.eps)?;
    let ks = parse_k_list(&args.k)?;
    let qhat = Family::PQhat { eps: eps.clone() }.build()?;
    check_stages(&[args.stage])?;
    if args.stage > max_feasible_stage(&qhat) {
        bail!("--M {} needs block channels beyond the size cap (largest is {})", args.stage, max_feasible_stage(&qhat));
    }
    let engine = BoundsEngine::new(solver_config(&args.solver)?);
    let row = |label: String, fsc: &FscParams| -> Result<DiscontinuityRow> {
        let report = engine.sandwich(fsc, args.stage)?;
        Ok(DiscontinuityRow {
            k: label,
            distance: distance(&qhat, fsc, 0)?,
            indecomp_gap: indecomposable_test(fsc, args.n, &Rat::from_integer(0.into()))?.worst_gap,
            lower: report.lower.value,
            upper: report.upper.value,
        })
    };
    let mut rows = ks
        .par_iter()
        .map(|&k| row(k.to_string(), &Family::PQk { eps: eps.clone(), k }.build()?))
        .collect::<Result<Vec<_>>>()?;
    rows.push(row("qhat".into(), &qhat)?);

    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_string(&["k", "distance", "indecomp_gap", "lower", "upper"], |w| {
            for r in &rows {
                w.write_record([
                    r.k.clone(),
                    format_rat(&r.distance),
                    format_rat(&r.indecomp_gap),
                    f(r.lower.lo_f64()),
                    f(r.upper.hi_f64()),
                ])?;
            }
            Ok(())
        })?,
        Format::Json => json_string(&rows)?,
    };
    Ok(Rendered::complete(body))
}

/// Runs one command on a worker pool of the requested size.
pub fn execute(cli: &Cli) -> Result<Rendered> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    pool.install(|| match &cli.command {
        Command::Bounds(a) => run_bounds(a),
        Command::Capacity(a) => run_capacity(a),
        Command::Indecomp(a) => run_indecomp(a),
        Command::DemoGap(a) => run_demo_gap(a),
        Command::DemoDiscontinuity(a) => run_demo_discontinuity(a),
    })
}

/// Writes the rendered body where the command asked for it.
pub fn write_output(out: &OutputArgs, body: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Bounds(a) => &a.output,
            Command::Capacity(a) => &a.output,
            Command::Indecomp(a) => &a.output,
            Command::DemoGap(a) => &a.output,
            Command::DemoDiscontinuity(a) => &a.output,
        }
    }
}

/// Exit code for a failed run: 2 when a solver ran out of iterations, 1
/// for everything else.
pub fn error_exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<BoundsError>() {
        Some(BoundsError::Nonconvergence { .. }) => 2,
        _ => 1,
    }
}
