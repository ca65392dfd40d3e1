use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Explainable boosting machines with cross-feature selection.
///
/// Every command prints its merged run manifest to stderr as one JSON line.
/// When --seed is absent the GLASSBOOST_SEED environment variable is used.
#[derive(Debug, Parser)]
#[command(name = "glassboost", version)]
pub struct Cli {
    /// Increase log verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a planted synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Run one feature selector on the training split.
    Select(SelectArgs),
    /// Fit a plain additive model on all features.
    Train(TrainArgs),
    /// Run one selection pipeline and evaluate it on the test split.
    Pipeline(PipelineArgs),
    /// Audit a term-importance dump for dominance and spurious interactions.
    Audit(AuditArgs),
    /// Run the benchmark matrix and write report files.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Rows to generate [default: 5000].
    #[arg(long)]
    pub rows: Option<usize>,
    /// Informative features [default: 2].
    #[arg(long)]
    pub informative: Option<usize>,
    /// Correlated copies of the informative features [default: 3].
    #[arg(long)]
    pub redundant: Option<usize>,
    /// Correlation of each copy with its source [default: 0.97].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Exact duplicates of the informative features [default: 0].
    #[arg(long)]
    pub exact: Option<usize>,
    /// Pure-noise features [default: 5].
    #[arg(long)]
    pub noise: Option<usize>,
    /// Negatives per positive [default: 9].
    #[arg(long)]
    pub imbalance: Option<f64>,
    /// Gaussian noise on the latent score that decides labels [default: 0.3].
    #[arg(long)]
    pub latent_noise: Option<f64>,
    /// Start from the acceptance benchmark settings instead of the defaults.
    #[arg(long)]
    pub benchmark: bool,
    /// JSON file with generator settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed [default: GLASSBOOST_SEED, else 7].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Dataset, split and shared settings for the model commands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the binary target column.
    #[arg(long)]
    pub target: Option<String>,
    /// JSON run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed [default: GLASSBOOST_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training share of the stratified split [default: 0.7, a 70:30 split].
    #[arg(long)]
    pub split: Option<f64>,
    /// Decision threshold for hard labels [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Pair terms fitted by the additive model [default: 10].
    #[arg(long)]
    pub interactions: Option<usize>,
    /// Maximum boosting rounds [default: 5000].
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Directory for output files; JSON goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectorFlags {
    /// Minimum normalized importance kept by model-based selectors [default: 0.02].
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Absolute correlation above which one feature of a pair is dropped [default: 0.7].
    #[arg(long)]
    pub correlation_cutoff: Option<f64>,
    /// Features are removed while any VIF exceeds this [default: 10].
    #[arg(long)]
    pub vif_threshold: Option<f64>,
    /// Features with unscaled variance at or below this are dropped [default: 0].
    #[arg(long)]
    pub variance_threshold: Option<f64>,
    /// Boruta iterations [default: 100].
    #[arg(long)]
    pub boruta_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Selector name: shap, adaboost, xgboost, random_forest, correlation, vif,
    /// variance_threshold, permutation, boruta, ebm or all.
    #[arg(long)]
    pub selector: String,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub selectors: SelectorFlags,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    Ensemble1,
    PoolA,
    PoolB,
    Altered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolBModeArg {
    Union,
    Borda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankRuleArg {
    Both,
    Either,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, value_enum)]
    pub kind: PipelineKind,
    /// Selector for ensemble1.
    #[arg(long, required_if_eq("kind", "ensemble1"))]
    pub selector: Option<String>,
    /// K: selectors that must agree for pool A [default: 4].
    #[arg(long)]
    pub k: Option<usize>,
    /// P: top features taken from each selector for pool B [default: 3].
    #[arg(long)]
    pub p: Option<usize>,
    /// How pool B merges rankings [default: union].
    #[arg(long, value_enum)]
    pub pool_b_mode: Option<PoolBModeArg>,
    /// Pool size in Borda mode [default: the union size].
    #[arg(long)]
    pub borda_size: Option<usize>,
    /// M: minimum normalized main importance kept by the altered model [default: 0.05].
    #[arg(long)]
    pub m: Option<f64>,
    /// Which mains must out-rank a pair for it to survive [default: both].
    #[arg(long, value_enum)]
    pub rank_rule: Option<RankRuleArg>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub selectors: SelectorFlags,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Term-importance JSON: a native dump, a pipeline result, or external records.
    #[arg(long)]
    pub importances: PathBuf,
    /// Print the full reports as JSON instead of summary lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark configuration JSON; without it the synthetic benchmark runs
    /// through all fourteen pipelines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed [default: GLASSBOOST_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for report.json, report.md, report.csv and model_<row>.json.
    #[arg(long, default_value = "bench_out")]
    pub out: PathBuf,
    /// Report formats to write; report.json is always written.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "json,markdown,csv"
    )]
    pub format: Vec<FormatArg>,
}
