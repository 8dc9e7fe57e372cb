use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::metrics::DEFAULT_ETA_BITS;
use crate::sim::{DEFAULT_ATOM_BUDGET, DEFAULT_CODEBOOK_BYTES, DEFAULT_ENUMERATION_BUDGET, DEFAULT_GAMMA};

#[derive(Debug, Parser)]
#[command(name = "wiretap", version, about = "Degraded wiretap channel analysis and simulation")]
pub struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON record to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shannon or secrecy capacity.
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Degradedness certificate of a wiretap kernel.
    DegradedCheck(DegradedArgs),
    /// The six secrecy metrics of a joint distribution.
    Metrics(MetricsArgs),
    /// Information-spectrum quantiles over a blocklength sweep.
    Spectrum(SpectrumArgs),
    /// One random-coding wiretap simulation.
    Simulate(SimulateArgs),
    /// Phase diagram over message rates and blocklengths.
    Sweep(SweepArgs),
    /// Gaussian wiretap channel statistics.
    #[command(subcommand)]
    Gaussian(GaussianCmd),
    /// Cesàro means of a non-stationary channel sequence.
    Cesaro(CesaroArgs),
    /// Run a command described by a TOML config file.
    Run(RunArgs),
}

#[derive(Debug, Subcommand)]
pub enum CapacityCmd {
    Shannon(ShannonArgs),
    Secrecy(SecrecyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShannonArgs {
    /// Channel file.
    pub channel: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SecrecyArgs {
    /// Wiretap file.
    pub wiretap: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DegradedArgs {
    pub wiretap: PathBuf,
    #[arg(long, default_value_t = crate::channel::DEFAULT_LP_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricsArgs {
    /// Joint distribution file (rows: messages, columns: eavesdropper outputs).
    pub joint: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_ETA_BITS)]
    pub eta1: f64,
    #[arg(long, default_value_t = DEFAULT_ETA_BITS)]
    pub eta2: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Input distribution file; uniform when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub seed: u64,
    /// CSV table (n, quantile, mean, variance).
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    /// Stored codebook when it fits in memory, ensemble otherwise.
    Auto,
    Codebook,
    Ensemble,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub wiretap: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Message rate in bits per symbol.
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Require exact leakage enumeration (fails when over budget).
    #[arg(long)]
    pub exact_leakage: bool,
    #[arg(long, default_value_t = 2000)]
    pub leakage_trials: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_ETA_BITS)]
    pub eta1: f64,
    #[arg(long, default_value_t = DEFAULT_ETA_BITS)]
    pub eta2: f64,
    #[arg(long, default_value_t = DEFAULT_CODEBOOK_BYTES)]
    pub codebook_bytes: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub enumeration_budget: f64,
    #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
    pub atom_budget: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub wiretap: PathBuf,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long)]
    pub rates: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 2000)]
    pub leakage_trials: usize,
    #[arg(long, default_value_t = DEFAULT_ETA_BITS)]
    pub eta2: f64,
    #[arg(long)]
    pub seed: u64,
    /// CSV table (rate, n, eps_hat, eps_ci, s6_hat, s6_ci, qn_hat, qn_ci).
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GaussianParamArgs {
    #[arg(long = "S", default_value_t = 1.0)]
    #[serde(rename = "S")]
    pub power: f64,
    #[arg(long = "sigma1sq", default_value_t = 1.0)]
    pub sigma1_sq: f64,
    #[arg(long = "sigma2sq", default_value_t = 4.0)]
    pub sigma2_sq: f64,
}

#[derive(Debug, Subcommand)]
pub enum GaussianCmd {
    Capacity(GaussianParamArgs),
    KStat(KStatArgs),
    Qn(GaussianQnArgs),
    /// Acceptance rate of the truncated input.
    Acceptance(AcceptanceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianInput {
    /// `x_i = √S`, on the boundary of the power ball.
    FullPower,
    Zero,
    /// A fresh truncated-Gaussian input per trial.
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KStatArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: GaussianParamArgs,
    /// Input backoff; defaults to 0.1·S.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 4000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = GaussianInput::FullPower)]
    pub input: GaussianInput,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GaussianQnArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: GaussianParamArgs,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AcceptanceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: GaussianParamArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub attempts: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CesaroArgs {
    /// constant, alternating, block-doubling or convergent, optionally
    /// prefixed with `bsc-`.
    #[arg(long, conflicts_with = "list", required_unless_present = "list")]
    pub family: Option<String>,
    /// Error probabilities `main,eve[,main,eve]` of the family anchors.
    #[arg(long, value_delimiter = ',', requires = "family")]
    pub params: Vec<f64>,
    /// Alphabet size of the symmetric family.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Explicit list of channel pairs.
    #[arg(long)]
    pub list: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Trailing rows used by the convergence diagnostic.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also run the resolvability-tail decay check at this gamma.
    #[arg(long, requires = "seed")]
    pub gamma: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
    pub qn_n_list: Vec<usize>,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV table (n, mean_CY, mean_CZ, diff).
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub config: PathBuf,
}
