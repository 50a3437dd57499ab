//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "citeneed",
    version,
    about = "Citation-need and citation-reason classification toolkit",
    long_about = "Builds labeled corpora from wiki-style markup, trains GRU/attention\n\
                  citation-need classifiers and feature baselines, fine-tunes the\n\
                  8-class citation-reason head, and renders evaluation, correlation,\n\
                  and attention reports. All commands are deterministic given --seed\n\
                  (fallback: the CITENEED_SEED environment variable, then 42)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an FA, LQN, or RND dataset from an articles JSONL file.
    BuildCorpus(BuildCorpusArgs),
    /// Train a citation-need model and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a need checkpoint on a labeled corpus.
    Evaluate(EvalArgs),
    /// Evaluate a need checkpoint on a different dataset (e.g. train FA,
    /// test LQN).
    CrossEval(EvalArgs),
    /// Predict citation-need probabilities for a corpus.
    Predict(PredictArgs),
    /// Render an attention explanation report for a corpus sample.
    Explain(ExplainArgs),
    /// Fine-tune (or train from scratch) the 8-class reason model.
    ReasonTrain(ReasonTrainArgs),
    /// Evaluate a reason checkpoint on a reason corpus.
    ReasonEval(EvalArgs),
    /// Point-biserial correlation of dictionary/section features with the
    /// labels.
    Correlate(CorrelateArgs),
    /// Cluster free-text citation reasons with k-means + elbow selection.
    ClusterReasons(ClusterReasonsArgs),
    /// Tabulate citation reasons by section or by article topic.
    Distribution(DistributionArgs),
    /// Run build -> train -> evaluate -> report from one declarative
    /// config file, caching completed stages.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct BuildCorpusArgs {
    /// Articles file: one JSON object per line with article_id, title,
    /// quality ("featured"|"other"), markup.
    #[arg(long)]
    pub articles: PathBuf,
    /// FA, LQN, or RND.
    #[arg(long)]
    pub dataset: String,
    /// Positive instances to sample (FA/LQN).
    #[arg(long)]
    pub positives: Option<usize>,
    /// Negative instances to sample (FA/LQN).
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Total instances for RND (balanced 50/50; default 20000).
    #[arg(long)]
    pub total: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output corpus JSONL path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled corpus JSONL.
    #[arg(long)]
    pub corpus: PathBuf,
    /// rnn | rnn-s | rnn-a | rnn-a-s.
    #[arg(long)]
    pub variant: String,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 100)]
    pub batch: usize,
    #[arg(long, default_value_t = 100)]
    pub hidden: usize,
    #[arg(long, default_value_t = 100)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 60)]
    pub max_len: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pretrained embeddings (text format: token f1 .. fd per line).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Checkpoint output path.
    #[arg(long)]
    pub out: PathBuf,
    /// 50/50 or 50/30/20.
    #[arg(long, default_value = "50/50")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Report CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Predictions JSONL path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Output HTML path (a .txt fallback is written next to it).
    #[arg(long)]
    pub out: PathBuf,
    /// Explain at most this many statements.
    #[arg(long, default_value_t = 20)]
    pub limit: usize,
}

#[derive(Debug, Args)]
pub struct ReasonTrainArgs {
    /// Reason corpus JSONL (lines carry a "reason" field).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Pretrained binary checkpoint (rnn-a-s). Omit to train from scratch.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 100)]
    pub batch: usize,
    #[arg(long, default_value_t = 100)]
    pub hidden: usize,
    #[arg(long, default_value_t = 100)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 60)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pretrained embeddings for from-scratch training.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Reason checkpoint output path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "50/50")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Correlation CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterReasonsArgs {
    /// Free-text reasons, one per line.
    #[arg(long)]
    pub reasons: PathBuf,
    /// Pretrained embeddings used to vectorize the texts.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Sweep k = 1..=max_k before elbow selection.
    #[arg(long, default_value_t = 10)]
    pub max_k: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Assignment CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    /// Reason corpus JSONL.
    #[arg(long)]
    pub corpus: PathBuf,
    /// section | topic.
    #[arg(long)]
    pub group_by: String,
    /// JSON sidecar mapping article_id -> topic (required for topic).
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Rows per reason in the stderr summary.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    /// Full counts CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Re-run every stage even when cached.
    #[arg(long)]
    pub force: bool,
    /// Override the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}
