use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzex_core::baselines::Linkage;
use fuzzex_core::fuzzy::FcmConfig;
use fuzzex_core::preprocess::DEFAULT_VARIANCE_THRESHOLD;

#[derive(Debug, Parser)]
#[command(name = "fuzzex", version, about = "Interval type-2 fuzzy clustering with rule reports")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Semicolon-separated, decimal commas, -200 as missing.
    Uci,
    /// Plain delimited numbers with a header row.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Type2,
    Type1,
    Dbscan,
    Agglomerative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Single,
    Complete,
    Average,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Average => Linkage::Average,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input table.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Uci)]
    pub format: Format,
    /// Comma-separated feature names to keep, in order.
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Field separator for csv input.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Extra cell value read as missing for csv input (repeatable).
    #[arg(long = "missing")]
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FcmArgs {
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 2.0)]
    pub fuzzifier: f64,
    #[arg(long, default_value_t = 0.005)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Half-width of the type-2 membership interval.
    #[arg(long, default_value_t = 0.05)]
    pub spread: f64,
    /// Weight type-2 center updates by midpoint^m.
    #[arg(long)]
    pub centers_use_fuzzifier: bool,
}

impl FcmArgs {
    pub fn config(&self, seed: u64) -> FcmConfig {
        FcmConfig {
            clusters: self.clusters,
            fuzzifier: self.fuzzifier,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            spread: self.spread,
            seed,
            centers_use_fuzzifier: self.centers_use_fuzzifier,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    /// Membership threshold for rule coverage.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Keep only the k most extreme features per rule.
    #[arg(long)]
    pub top_features: Option<usize>,
    /// Two-column CSV (index,name) naming clusters.
    #[arg(long)]
    pub names: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Experiment plan (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override every seed in the plan.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit imputation, scaling and PCA; write the pipeline and projected data.
    Preprocess {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = DEFAULT_VARIANCE_THRESHOLD)]
        variance_threshold: f64,
        /// Accepted for uniformity; preprocessing is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster the projected data and write the partition and metrics.
    Cluster {
        #[command(flatten)]
        data: DataArgs,
        /// Reuse a fitted pipeline instead of fitting on the input.
        #[arg(long)]
        pipeline: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_VARIANCE_THRESHOLD)]
        variance_threshold: f64,
        #[arg(long, value_enum, default_value_t = Method::Type2)]
        method: Method,
        #[command(flatten)]
        fcm: FcmArgs,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 5)]
        min_pts: usize,
        #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
        linkage: LinkageArg,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a fuzzy partition into ranked linguistic rules.
    Explain {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        pipeline: PathBuf,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, value_enum, default_value_t = ReportFormatArg::Text)]
        report_format: ReportFormatArg,
        /// Accepted for uniformity; rule extraction is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute silhouette and entropy of a stored partition.
    Metrics {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Accepted for uniformity; metrics are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the method comparison of an experiment plan.
    Compare(PlanArgs),
    /// Run the fuzzifier × cluster-count sweep of an experiment plan.
    Sensitivity(PlanArgs),
    /// Run the runtime-versus-size study of an experiment plan.
    Scalability(PlanArgs),
}
