mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dbfraud::fraud::FraudError;
use dbfraud::graph::GraphError;
use dbfraud::protocol::ProtocolError;

/// Distance-fraud analysis for graph-based distance-bounding protocols.
#[derive(Debug, Parser)]
#[command(name = "dbfraud", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice (labelings, sampling, sessions).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Largest walk enumeration accepted.
    #[arg(long, global = true, env = "DBFRAUD_MAX_WALKS", default_value_t = 1 << 26)]
    pub max_walks: u64,
    /// Largest candidate-sequence enumeration accepted.
    #[arg(long, global = true, env = "DBFRAUD_MAX_CANDIDATES", default_value_t = 1 << 26)]
    pub max_candidates: u64,
    /// Largest n for the exact tree recursion.
    #[arg(long, global = true, env = "DBFRAUD_MAX_EXACT_ROUNDS", default_value_t = 12)]
    pub max_exact_rounds: u32,
    /// Brute force enumerates at most 2^this labelings.
    #[arg(long, global = true, env = "DBFRAUD_MAX_BRUTE_VERTICES", default_value_t = 22)]
    pub max_brute_vertices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a protocol graph and write it as graph JSON.
    Generate(GenerateArgs),
    /// Most frequent label sequence from a start vertex.
    Mfs(MfsArgs),
    /// Expected maximum occurrence and early-reply success probability.
    Df(DfArgs),
    /// Reduce a DIMACS CNF formula to a Binary MFS instance.
    Reduce(ReduceArgs),
    /// Run protocol sessions against an adversary.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Tree,
    Poulidor,
    Gentree,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GraphKind,
    /// Rounds (tree depth, Poulidor rounds, or n of T^m_n).
    #[arg(short = 'n', long)]
    pub rounds: u32,
    /// Root fan-out parameter for gentree (2m children).
    #[arg(short, long, default_value_t = 1)]
    pub m: u32,
    /// Explicit vertex labels as a bit string in vertex-id order.
    #[arg(long)]
    pub labels: Option<String>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Seq,
    Walk,
}

#[derive(Debug, Args)]
pub struct MfsArgs {
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Sequence length in vertices.
    #[arg(short = 'k', long)]
    pub length: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DfMethod {
    ExactTree,
    Brute,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolKind {
    Tree,
    Poulidor,
}

#[derive(Debug, Args)]
pub struct DfArgs {
    #[arg(value_enum)]
    pub method: DfMethod,
    #[arg(short = 'n', long, required_unless_present = "sweep")]
    pub rounds: Option<u32>,
    /// Run over an inclusive range of rounds, `a..b`, and print one table.
    #[arg(long, value_parser = parse_range)]
    pub sweep: Option<(u32, u32)>,
    /// Graph file for brute / mc (default: the protocol graph for n rounds).
    #[arg(long, conflicts_with = "protocol")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProtocolKind::Tree)]
    pub protocol: ProtocolKind,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Floating-point recursion instead of exact rationals (exact-tree only).
    #[arg(long)]
    pub float: bool,
    /// Permit float mode beyond the exact-round limit.
    #[arg(long)]
    pub allow_large: bool,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u32 = a.parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b: u32 = b.parse().map_err(|_| format!("bad range end {b:?}"))?;
    if a == 0 || a > b {
        return Err(format!("range {s} must satisfy 1 <= a <= b"));
    }
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub cnf: PathBuf,
    /// Write the reduction graph here (default: stdout unless --verify).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Check the satisfiability equivalence and the walk-length property.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    Honest,
    EarlyReply,
    /// Experimental greedy heuristic.
    Greedy,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ProtocolKind::Tree)]
    pub protocol: ProtocolKind,
    /// Protocol graph file instead of a generated one.
    #[arg(long, conflicts_with = "protocol")]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    #[arg(short = 'n', long)]
    pub rounds: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = AdversaryArg::Honest)]
    pub adversary: AdversaryArg,
    /// Fixed early replies as a bit string (early-reply only).
    #[arg(long)]
    pub replies: Option<String>,
    /// Use the graph's own labels instead of fresh PRF labels per session.
    #[arg(long)]
    pub fixed_labels: bool,
    #[arg(long, default_value = "shared key")]
    pub key: String,
    /// Per-round timing flags as a bit string (1 = within bound).
    #[arg(long)]
    pub timing: Option<String>,
    /// Also write the first N session transcripts as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub transcripts: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub transcript_count: u64,
}

/// Marker for failed verification verdicts (exit code 4).
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<VerificationFailed>() {
            return EXIT_VERIFY;
        }
        let resource = match cause {
            c if c.is::<FraudError>() => c.downcast_ref::<FraudError>().is_some_and(FraudError::is_resource_limit),
            c if c.is::<GraphError>() => {
                matches!(c.downcast_ref::<GraphError>(), Some(GraphError::LimitExceeded { .. }))
            }
            c if c.is::<ProtocolError>() => {
                matches!(
                    c.downcast_ref::<ProtocolError>(),
                    Some(ProtocolError::Graph(GraphError::LimitExceeded { .. }))
                )
            }
            _ => false,
        };
        if resource {
            return EXIT_RESOURCE;
        }
    }
    EXIT_INPUT
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == BrokenPipe)
            || c.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind()) == Some(BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not an error.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
