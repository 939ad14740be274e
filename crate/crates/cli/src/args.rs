use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use riu_core::studies::Statistic;
use riu_core::RenyiOrder;

/// Environment variable that supplies the default seed.
pub const SEED_ENV: &str = "RIUENT_SEED";

#[derive(Debug, Parser)]
#[command(name = "riuent", version, about = "Minimal RIU entropy, tensor decompositions and entanglement invariants")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the Renyi entropy over local unitaries.
    Riu(RiuArgs),
    /// Renyi entropy of the probability vector in the computational basis.
    Entropy(EntropyArgs),
    /// Higher-order SVD: factors, core tensor and k-mode singular values.
    Hosvd(StateOut),
    /// CP decomposition by alternating least squares.
    Parafac(ParafacArgs),
    /// Smallest CP rank reaching the residual tolerance.
    Rank(RankArgs),
    /// 3-tangle of a three-qubit state.
    Tangle(StateOut),
    /// Normalized four-qubit hyperdeterminant T.
    Hyperdet(StateOut),
    /// Exact Haar moments of the 3-tangle.
    Moments(MomentsArgs),
    /// Monte Carlo statistic over Haar-random states.
    Ensemble(EnsembleArgs),
    /// Raw, HOSVD and RIU entropy columns over Haar-random states.
    Table(TableArgs),
    /// Largest-component and separable-overlap scaling with the local dimension.
    Scaling(ScalingArgs),
    /// Largest squared Schmidt coefficient bound for three parties.
    SchmidtBound(SchmidtArgs),
    /// List named states or export one as JSON.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["state", "state_file"])))]
pub struct StateArgs {
    /// Catalog name, or a Dicke state written D(n,k).
    #[arg(long)]
    pub state: Option<String>,
    /// JSON state file: {"dims":[...],"coeffs":[[re,im],...]}.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StateOut {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_order(s: &str) -> Result<RenyiOrder, String> {
    s.parse::<RenyiOrder>().map_err(|e| e.to_string())
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse::<Statistic>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct RiuArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Renyi order: a non-negative real or `inf`.
    #[arg(long, value_parser = parse_order)]
    pub q: RenyiOrder,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    /// One-parameter optimization for permutation-invariant qubit states.
    #[arg(long)]
    pub symmetric: bool,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_parser = parse_order)]
    pub q: RenyiOrder,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ParafacArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub rank: usize,
    /// Random starts; one HOSVD-seeded start is always added.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Residual tolerance relative to the tensor norm.
    #[arg(long, default_value_t = riu_core::decomp::RANK_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Order `k` of the even moment `<tau^(2k)>`, from 1 to 6.
    #[arg(long)]
    pub k: u32,
    /// Print the reduced fraction and its decimal value only.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// raw, hosvd, riu, tangle, tangle2, hyper-t or lambda-max.
    #[arg(long, value_parser = parse_statistic)]
    pub stat: Statistic,
    /// Renyi order for the entropy statistics.
    #[arg(long, value_parser = parse_order)]
    pub q: Option<RenyiOrder>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Fixed bin count (default: Freedman-Diaconis).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Random-walk starts for the `riu` statistic.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Random-walk steps per start for the `riu` statistic.
    #[arg(long, default_value_t = 4000)]
    pub steps: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Histogram CSV: bin_left,bin_right,count,density.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Beta-model fit with tau and tau^2 overlays as JSON (tangle only).
    #[arg(long)]
    pub beta_fit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Renyi orders (default 1, 2, 100).
    #[arg(long, value_parser = parse_order, value_delimiter = ',')]
    pub q: Vec<RenyiOrder>,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 4000)]
    pub steps: usize,
    #[arg(long)]
    pub bins: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Summary CSV: q,column,mean,second_moment,std.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full table with histograms as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = 2)]
    pub dmin: usize,
    #[arg(long, default_value_t = 8)]
    pub dmax: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Largest d for which the random-walk separable overlap is computed.
    #[arg(long, default_value_t = 3)]
    pub lu_max_d: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Per-d CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full report with fits as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchmidtArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Also compute the separable overlap by random walk.
    #[arg(long)]
    pub overlap: bool,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Export this state as a JSON state file.
    #[arg(long)]
    pub export: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}
