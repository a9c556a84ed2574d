use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hddcrp", version, about = "Event coreference with hierarchical distance-dependent CRPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the pairwise mention-similarity model.
    TrainDistance(TrainArgs),
    /// Run Gibbs chains of a clustering model.
    Sample(SampleArgs),
    /// Run a deterministic baseline.
    Baseline(BaselineArgs),
    /// Score predicted clusterings against gold chains.
    Score(ScoreArgs),
    /// Enumerate the exact posterior over clusterings of a tiny corpus.
    OraclePosterior(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// JSON-lines corpus file.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Gold chains sidecar (`{"gold_chains": [...]}`), replacing any footer.
    #[arg(long)]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Word vectors: one `lemma v1 v2 ...` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Synonym lists: one `lemma<TAB>syn1,syn2` per line.
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// Minimum document similarity for cross-document training pairs.
    #[arg(long, default_value_t = hddcrp::pairwise::DEFAULT_SIGMA)]
    pub sigma: f64,
    /// L2 regularization strength.
    #[arg(long, default_value_t = hddcrp::pairwise::DEFAULT_L2)]
    pub l2: f64,
    /// Fraction of pairs held out for the reported accuracy.
    #[arg(long, default_value_t = 0.2)]
    pub holdout: f64,
    /// Seed of the held-out split.
    #[arg(long, env = "HDDCRP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output model file; the feature index is also written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointEstimateArg {
    Final,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Fixed,
    Randomized,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// hddcrp, hddcrp-star, ddcrp or hdp-lex.
    #[arg(long)]
    pub model: Option<String>,
    /// Trained pairwise model; required by every model except hdp-lex.
    #[arg(long)]
    pub distance: Option<PathBuf>,
    /// JSON file of sampler settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub alpha_0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, value_enum)]
    pub point_estimate: Option<PointEstimateArg>,
    #[arg(long, value_enum)]
    pub scan: Option<ScanArg>,
    #[arg(long, env = "HDDCRP_SEED")]
    pub seed: Option<u64>,
    /// Maximum number of chains run in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Lemma,
    Agglomerative,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[arg(long, value_enum)]
    pub method: BaselineMethod,
    /// Trained pairwise model, for the agglomerative baseline.
    #[arg(long)]
    pub distance: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub wd_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cd_threshold: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingArg {
    Wd,
    Cd,
    Both,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Predicted clustering files; their reports are averaged.
    #[arg(long = "pred", required = true)]
    pub preds: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = SettingArg::Both)]
    pub setting: SettingArg,
    /// Report file; the text table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[arg(long)]
    pub model: String,
    /// Trained pairwise model; without it every link weight is 1.
    #[arg(long)]
    pub distance: Option<PathBuf>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub alpha_0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Replace the word likelihood by a constant.
    #[arg(long)]
    pub flat_likelihood: bool,
    /// Restrict flat DDCRP links to earlier mentions.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: PathBuf,
}
