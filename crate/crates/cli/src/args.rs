use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qlink_core::analytic_model::DEFAULT_TARGET_PF;
use qlink_core::{Adder, CodeStack, ModelMode};

#[derive(Debug, Parser)]
#[command(
    name = "qlink",
    version,
    about = "Failure probability and EPR-pair cost of moving encoded qubits between nodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true, env = "QLINK_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Monte Carlo worker threads [default: available parallelism].
    #[arg(long, global = true, value_parser = parse_count::<usize>)]
    pub workers: Option<usize>,

    /// Analytic model.
    #[arg(long, global = true, value_parser = parse_mode, default_value = "leading")]
    pub mode: ModelMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the builtin codes.
    Codes,
    /// Allowable teleportation error rate for one stack and workload.
    Analyze(AnalyzeArgs),
    /// Allowable error rates for every stack and teleportation count.
    Table3(Table3Args),
    /// Monte Carlo estimate of logical block loss over a link.
    Mc(McArgs),
    /// Monte Carlo grid over p_t and p_m, for plotting.
    Sweep(SweepArgs),
    /// Telegate and teledata cost at every breakpoint of an encoder.
    Cut(CircuitArgs),
    /// EPR-pair cost of distributed error correction.
    DqecCost(DqecArgs),
    /// Logical teleportation count for Shor's algorithm.
    Workload(WorkloadArgs),
    /// Serial versus parallel cycle times.
    LinkTiming(LinkTimingArgs),
    /// Serial or parallel link, from timing and reliability.
    Recommend(RecommendArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long, default_value = "none", value_parser = parse_stack)]
    pub stack: CodeStack,
    /// Total logical teleportations.
    #[arg(long, conflicts_with = "bits")]
    pub t: Option<f64>,
    /// Take t from the workload model for this problem size.
    #[arg(long, value_parser = parse_count::<u32>)]
    pub bits: Option<u32>,
    #[arg(long, value_parser = parse_adder, requires = "bits")]
    #[serde(serialize_with = "ser_display_opt")]
    pub adder: Option<Adder>,
    #[arg(long, default_value_t = DEFAULT_TARGET_PF)]
    pub target_pf: f64,
    /// Also report the failure probability at this teleportation error rate.
    #[arg(long)]
    pub pt: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Table3Args {
    /// Restrict to one stack.
    #[arg(long, value_parser = parse_stack)]
    pub stack: Option<CodeStack>,
    /// Restrict to one teleportation count.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TARGET_PF)]
    pub target_pf: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LinkArgs {
    /// Temporal multiplexing (one channel).
    #[arg(long, conflicts_with = "parallel")]
    pub serial: bool,
    /// Spatial multiplexing [default].
    #[arg(long)]
    pub parallel: bool,
    /// Parallel link width [default: block size].
    #[arg(long, value_parser = parse_count::<u32>, conflicts_with = "serial")]
    pub lanes: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long, default_value = "7-1-3", value_parser = parse_stack)]
    pub stack: CodeStack,
    #[arg(long, default_value_t = 0.01)]
    pub pt: f64,
    #[arg(long, default_value_t = 0.0)]
    pub pm: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub link: LinkArgs,
    #[arg(long, default_value = "1e6", value_parser = parse_count::<u64>)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "7-1-3", value_parser = parse_stack)]
    pub stack: CodeStack,
    /// Comma-separated teleportation error rates.
    #[arg(long, value_delimiter = ',', default_value = "1e-3,3e-3,1e-2,3e-2")]
    pub pt: Vec<f64>,
    /// Comma-separated memory error rates per slot.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub pm: Vec<f64>,
    /// Run only serial links (default: both).
    #[arg(long, conflicts_with = "parallel")]
    pub serial: bool,
    /// Run only parallel links (default: both).
    #[arg(long)]
    pub parallel: bool,
    #[arg(long, value_parser = parse_count::<u32>)]
    pub lanes: Option<u32>,
    #[arg(long, default_value = "1e5", value_parser = parse_count::<u64>)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CircuitArgs {
    /// Encoder circuit JSON file, or `default` for the Steane zero encoder.
    #[arg(long, default_value = "default")]
    pub circuit: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DqecArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub circuit: CircuitArgs,
    /// Code the circuit encodes [default: builtin code of matching size].
    #[arg(long, value_parser = parse_stack)]
    pub stack: Option<CodeStack>,
}

#[derive(Debug, Args, Serialize)]
pub struct WorkloadArgs {
    #[arg(long, value_parser = parse_count::<u32>)]
    pub bits: u32,
    #[arg(long, default_value = "ripple", value_parser = parse_adder)]
    #[serde(serialize_with = "ser_display")]
    pub adder: Adder,
}

#[derive(Debug, Args, Serialize)]
pub struct LinkTimingArgs {
    /// Teleportation time.
    #[arg(long)]
    pub tt: f64,
    /// Local error-correction cycle time.
    #[arg(long)]
    pub tlqec: f64,
    /// Qubits per transferred block.
    #[arg(long, value_parser = parse_count::<u32>)]
    pub n: u32,
    #[arg(long, value_parser = parse_count::<u32>)]
    pub lanes: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct RecommendArgs {
    /// Single-level code carried on the link.
    #[arg(long, default_value = "7-1-3", value_parser = parse_stack)]
    pub stack: CodeStack,
    #[arg(long, default_value_t = 1e-3)]
    pub pt: f64,
    /// Memory error per slot [default: p_t / (10 (n - 1))].
    #[arg(long)]
    pub pm: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tlqec: f64,
    #[arg(long, default_value_t = 1.5)]
    pub max_slowdown: f64,
    /// Largest acceptable serial/parallel failure ratio.
    #[arg(long, default_value_t = 1.5)]
    pub max_penalty: f64,
    /// Also measure the failure ratio by Monte Carlo with this many trials.
    #[arg(long, value_parser = parse_count::<u64>)]
    pub trials: Option<u64>,
}

/// Integer that may be written in scientific notation, e.g. `1e7`.
fn parse_count<T: TryFrom<u64>>(s: &str) -> Result<T, String> {
    let value = match s.parse::<u64>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
            if !(f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64) {
                return Err(format!("{s:?} is not a non-negative integer"));
            }
            f as u64
        }
    };
    T::try_from(value).map_err(|_| format!("{s:?} is out of range"))
}

fn parse_stack(s: &str) -> Result<CodeStack, String> {
    s.parse().map_err(|e: qlink_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<ModelMode, String> {
    s.parse().map_err(|e: qlink_core::Error| e.to_string())
}

fn parse_adder(s: &str) -> Result<Adder, String> {
    s.parse().map_err(|e: qlink_core::Error| e.to_string())
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_display_opt<T: std::fmt::Display, S: serde::Serializer>(
    v: &Option<T>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}
