use clap::{Args, Parser, Subcommand};
use mbosm::bounds::DEFAULT_SLACK;
use mbosm::instance::GenKind;
use mbosm::oracle::OracleCaps;
use mbosm::policies::{PolicyKind, DEFAULT_REPLICAS};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "mbosm", version, about = "Multi-budgeted online stochastic matching lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Solve the benchmark LP and print it as JSON.
    Lp { file: PathBuf },
    /// Estimate a policy's performance and emit one CSV row.
    Simulate(SimulateArgs),
    /// Exact clairvoyant and Greedy values on a tiny instance.
    Opt(OptArgs),
    /// Balls-and-bins ratio E[T']/T.
    Bbins(BbinsArgs),
    /// Table of closed-form bounds.
    Bounds(BoundsArgs),
    /// Run every entry of an experiment manifest.
    Campaign { manifest: PathBuf },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: GenKind,
    /// Generator parameter as key=value; repeatable.
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub policy: PolicyKind,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ATT replica count N.
    #[arg(long, default_value_t = DEFAULT_REPLICAS)]
    pub replicas: usize,
    /// CSV file to append to; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one JSON line per episode.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapsArgs {
    #[arg(long, default_value_t = OracleCaps::default().max_states)]
    pub max_states: usize,
    #[arg(long = "max-T", default_value_t = OracleCaps::default().max_t)]
    pub max_t: usize,
    #[arg(long, default_value_t = OracleCaps::default().max_edges)]
    pub max_edges: usize,
    #[arg(long, default_value_t = OracleCaps::default().max_outcomes)]
    pub max_outcomes: usize,
}

impl CapsArgs {
    pub fn caps(&self) -> OracleCaps {
        OracleCaps {
            max_states: self.max_states,
            max_t: self.max_t,
            max_edges: self.max_edges,
            max_outcomes: self.max_outcomes,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptArgs {
    pub file: PathBuf,
    /// Also report the exact value of SAMP(alpha).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub caps: CapsArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct BbinsArgs {
    #[arg(long)]
    pub delta: usize,
    #[arg(long = "B")]
    pub b: u32,
    #[arg(long = "T")]
    pub t: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = OracleCaps::default().max_states)]
    pub max_states: usize,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = PolicyKind::Samp)]
    pub policy: PolicyKind,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: usize,
    #[arg(long = "B")]
    pub b: Option<u64>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
}
