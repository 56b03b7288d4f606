use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pess_core::oracle::Objective;
use pess_core::ScanOrder;

#[derive(Debug, Parser)]
#[command(
    name = "pess",
    version,
    about = "Embed chains of virtual security network functions"
)]
pub struct Cli {
    /// Seed for topology generation and workloads.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Division guard used by cost and delay formulas.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Weight of CPU against bandwidth in the cost.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed one request with the PESS heuristic.
    Embed(EmbedArgs),
    /// Solve one request exactly.
    Oracle(OracleArgs),
    /// Simulate a Poisson workload with one or both solvers.
    Simulate(SimulateArgs),
    /// PESS against the baseline on identical streams over loads and seeds.
    Compare(CompareArgs),
    /// Heuristic cost against the exact optimum, request by request.
    OracleGap(OracleGapArgs),
    /// Embedding time as the remote endpoint set grows.
    Scalability(ScalabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    /// Barabási-Albert graph from --nodes and --attachment-m.
    Ba,
    /// Topology document from --topology-file.
    File,
    Garr,
    Stanford,
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    /// Defaults to `file` when --topology-file is given, else `ba`.
    #[arg(long)]
    pub topology: Option<TopologyKind>,
    #[arg(long, default_value_t = 20)]
    pub nodes: usize,
    #[arg(long = "attachment-m", default_value_t = 2)]
    pub attachment: usize,
    #[arg(long)]
    pub topology_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WorkloadArgs {
    /// TOML file with optional [workload], [cost], [pess] and [oracle] tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub requests: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub mean_holding: Option<f64>,
    /// Rebuild-and-compare the network state every this many events.
    #[arg(long)]
    pub verify_every: Option<u64>,
    /// Size of the random remote endpoint set.
    #[arg(long)]
    pub ep2_size: Option<usize>,
    #[arg(long)]
    pub region_bind_probability: Option<f64>,
    #[arg(long)]
    pub border_bias: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    /// Request document (TOML, or JSON with a .json extension).
    #[arg(long)]
    pub request: PathBuf,
    /// Print the JSON document instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value_t = Scan::Ascending)]
    pub scan: Scan,
    #[arg(long)]
    pub expand_all_ep2: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scan {
    Ascending,
    LiteralDescending,
}

impl From<Scan> for ScanOrder {
    fn from(s: Scan) -> Self {
        match s {
            Scan::Ascending => ScanOrder::Ascending,
            Scan::LiteralDescending => ScanOrder::LiteralDescending,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    ResourceCost,
    ActiveNodes,
    MinLatency,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::ResourceCost => Objective::ResourceCost,
            ObjectiveArg::ActiveNodes => Objective::ActiveNodes,
            ObjectiveArg::MinLatency => Objective::MinLatency,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::ResourceCost)]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    pub limits: OracleLimits,
}

#[derive(Debug, Clone, Args)]
pub struct OracleLimits {
    /// Hop bound on every route segment.
    #[arg(long)]
    pub max_path_len: Option<usize>,
    /// Give up after this many placements plus search nodes.
    #[arg(long)]
    pub max_enumeration: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Pess,
    Baseline,
    Both,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// Offered loads in Erlang.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub loads: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SolverArg::Both)]
    pub solver: SolverArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub loads: Vec<f64>,
    /// Workload seeds; defaults to --seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct OracleGapArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// Offered load in Erlang (default 50).
    #[arg(long)]
    pub load: Option<f64>,
    #[command(flatten)]
    pub limits: OracleLimits,
}

#[derive(Debug, Args)]
pub struct ScalabilityArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub nodes: Vec<usize>,
    #[arg(long = "attachment-m", default_value_t = 5)]
    pub attachment: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,100,250")]
    pub ep2_sizes: Vec<usize>,
    /// Requests embedded per case.
    #[arg(long, default_value_t = 200)]
    pub requests: usize,
}
