//! The `citeneed` command-line surface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error, 3
//! internal error. Results go to files or stdout; diagnostics go to
//! stderr. No command mutates its input files.

mod args;
mod pipeline;

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::panic::AssertUnwindSafe;
use std::path::Path;

use serde::Deserialize;

use crate::analysis::{
    cluster_reason_texts, correlate_features, correlation_to_csv, distribution_to_csv,
    reason_distribution, render_attention_report, report_to_csv, AnalysisError, ExplainedModel,
    GroupBy,
};
use crate::baselines::{shipped_lexicons, BaselineError, FeatureConfig, FeatureExtractor};
use crate::corpus::{
    build_fa_dataset, build_lqn_dataset, build_rnd_dataset, parse_article_verbose, read_corpus,
    read_reason_corpus, write_corpus, CorpusError, DatasetId, QualityClass, RawArticle,
    DEFAULT_RND_TOTAL,
};
use crate::encoder::{EncoderError, PretrainedVectors};
use crate::models::{
    evaluate, evaluate_reason, fine_tune_reason, load_need_checkpoint, load_reason_checkpoint,
    save_need_checkpoint, save_reason_checkpoint, train_need, train_reason_from_scratch,
    ModelError, SplitSpec, TrainConfig, TrainHistory, Variant,
};
use crate::numerics::AdamConfig;

pub use args::{Cli, Command};
pub use pipeline::run_pipeline;

/// Seed used when neither `--seed` nor `CITENEED_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV_VAR: &str = "CITENEED_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EncoderError> for CliError {
    fn from(e: EncoderError) -> Self {
        match e {
            EncoderError::Numerics(n) => CliError::Internal(n.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Numerics(n) => CliError::Internal(n.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(ModelError::Numerics(n)) => CliError::Internal(n.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Parses argv and runs one subcommand, translating every outcome into the
/// documented exit code.
pub fn dispatch(argv: Vec<String>) -> i32 {
    use clap::error::ErrorKind;
    use clap::Parser;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
        Err(_) => {
            eprintln!("internal error: unexpected panic");
            3
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildCorpus(a) => cmd_build_corpus(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) | Command::CrossEval(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Explain(a) => cmd_explain(a),
        Command::ReasonTrain(a) => cmd_reason_train(a),
        Command::ReasonEval(a) => cmd_reason_eval(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::ClusterReasons(a) => cmd_cluster_reasons(a),
        Command::Distribution(a) => cmd_distribution(a),
        Command::Pipeline(a) => run_pipeline(a),
    }
}

pub(crate) fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV_VAR} must be an unsigned integer, got '{text}'"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_variant(s: &str) -> Result<Variant, CliError> {
    Variant::parse(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown variant '{s}' (expected rnn, rnn-s, rnn-a, or rnn-a-s)"
        ))
    })
}

fn parse_split(s: &str) -> Result<SplitSpec, CliError> {
    SplitSpec::parse(s)
        .ok_or_else(|| CliError::Usage(format!("unknown split '{s}' (expected 50/50 or 50/30/20)")))
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// One article per line: {"article_id","title","quality","markup"}.
#[derive(Debug, Deserialize)]
struct ArticleLine {
    article_id: String,
    #[serde(default)]
    title: Option<String>,
    quality: QualityClass,
    markup: String,
}

pub(crate) fn read_articles_jsonl(path: &Path) -> Result<Vec<RawArticle>, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut articles = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ArticleLine = serde_json::from_str(&line).map_err(|e| {
            CliError::Data(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        let (mut article, warnings) =
            parse_article_verbose(&parsed.markup, &parsed.article_id, parsed.quality)?;
        if let Some(title) = parsed.title {
            article.title = title;
        }
        for w in warnings {
            eprintln!("warning: article {}: {}", w.article_id, w.message);
        }
        articles.push(article);
    }
    Ok(articles)
}

fn cmd_build_corpus(a: args::BuildCorpusArgs) -> Result<(), CliError> {
    let dataset = DatasetId::parse(&a.dataset)
        .ok_or_else(|| CliError::Usage(format!("unknown dataset '{}' (expected FA, LQN, or RND)", a.dataset)))?;
    match dataset {
        DatasetId::Fa | DatasetId::Lqn => {
            if a.positives.is_none() || a.negatives.is_none() {
                return Err(CliError::Usage(format!(
                    "--positives and --negatives are required for {}",
                    dataset.as_str()
                )));
            }
        }
        DatasetId::Rnd => {
            if a.positives.is_some() || a.negatives.is_some() {
                return Err(CliError::Usage(
                    "RND uses --total, not --positives/--negatives".into(),
                ));
            }
        }
    }
    let seed = resolve_seed(a.seed)?;
    let articles = read_articles_jsonl(&a.articles)?;
    let instances = match dataset {
        DatasetId::Fa => build_fa_dataset(&articles, a.positives.unwrap(), a.negatives.unwrap(), seed)?,
        DatasetId::Lqn => build_lqn_dataset(&articles, a.positives.unwrap(), a.negatives.unwrap(), seed)?,
        DatasetId::Rnd => build_rnd_dataset(&articles, a.total.unwrap_or(DEFAULT_RND_TOTAL), seed)?,
    };
    write_corpus(&instances, &a.out)?;
    eprintln!(
        "built {} {} instances from {} articles -> {}",
        instances.len(),
        dataset.as_str(),
        articles.len(),
        a.out.display()
    );
    Ok(())
}

pub(crate) fn load_embeddings(path: &Path) -> Result<PretrainedVectors, CliError> {
    Ok(PretrainedVectors::load(path, None)?)
}

pub(crate) fn print_history(history: &TrainHistory) {
    for w in &history.warnings {
        eprintln!("warning: {w}");
    }
    for e in &history.epochs {
        eprintln!(
            "epoch {:>3}: loss {:.4}, eval accuracy {:.4}, eval F1 {:.4}",
            e.epoch, e.train_loss, e.eval_accuracy, e.eval_f1
        );
    }
}

fn cmd_train(a: args::TrainArgs) -> Result<(), CliError> {
    let variant = parse_variant(&a.variant)?;
    let split = parse_split(&a.split)?;
    let seed = resolve_seed(a.seed)?;
    let corpus = read_corpus(&a.corpus)?;
    let vectors = a.embeddings.as_deref().map(load_embeddings).transpose()?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        hidden_dim: a.hidden,
        embed_dim: a.embed_dim,
        max_len: a.max_len,
        adam: AdamConfig::with_learning_rate(a.learning_rate),
        seed,
        split,
        freeze_pretrained: true,
    };
    let (model, history) = train_need(&corpus, &cfg, variant, vectors.as_ref())?;
    print_history(&history);
    save_need_checkpoint(&model, &a.out)?;
    eprintln!("checkpoint -> {}", a.out.display());
    if let Some(last) = history.epochs.last() {
        println!(
            "variant,{}\neval_accuracy,{:.4}\neval_f1,{:.4}",
            variant.cli_name(),
            last.eval_accuracy,
            last.eval_f1
        );
    }
    Ok(())
}

fn cmd_evaluate(a: args::EvalArgs) -> Result<(), CliError> {
    let model = load_need_checkpoint(&a.checkpoint)?;
    let corpus = read_corpus(&a.corpus)?;
    let report = evaluate(&model, &corpus)?;
    write_or_print(a.out.as_deref(), &report_to_csv(&report))
}

fn cmd_predict(a: args::PredictArgs) -> Result<(), CliError> {
    let model = load_need_checkpoint(&a.checkpoint)?;
    let corpus = read_corpus(&a.corpus)?;
    let mut lines = String::new();
    for instance in &corpus {
        let prob = model.forward(&instance.statement)?;
        let record = serde_json::json!({
            "article_id": instance.statement.article_id,
            "text": instance.statement.text,
            "probability": prob,
        });
        lines.push_str(&record.to_string());
        lines.push('\n');
    }
    write_or_print(a.out.as_deref(), &lines)
}

fn cmd_explain(a: args::ExplainArgs) -> Result<(), CliError> {
    let model = load_need_checkpoint(&a.checkpoint)?;
    let corpus = read_corpus(&a.corpus)?;
    let statements: Vec<_> = corpus
        .iter()
        .take(a.limit)
        .map(|i| i.statement.clone())
        .collect();
    render_attention_report(&ExplainedModel::Need(&model), &statements, &a.out)?;
    eprintln!("attention report -> {}", a.out.display());
    Ok(())
}

fn cmd_reason_train(a: args::ReasonTrainArgs) -> Result<(), CliError> {
    let split = parse_split(&a.split)?;
    let seed = resolve_seed(a.seed)?;
    let reasons = read_reason_corpus(&a.corpus)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        hidden_dim: a.hidden,
        embed_dim: a.embed_dim,
        max_len: a.max_len,
        adam: AdamConfig::with_learning_rate(a.learning_rate),
        seed,
        split,
        freeze_pretrained: true,
    };
    let (model, history) = match &a.checkpoint {
        Some(path) => {
            let pretrained = load_need_checkpoint(path)?;
            fine_tune_reason(&pretrained, &reasons, &cfg)?
        }
        None => {
            let vectors = a.embeddings.as_deref().map(load_embeddings).transpose()?;
            train_reason_from_scratch(&reasons, &cfg, vectors.as_ref())?
        }
    };
    print_history(&history);
    save_reason_checkpoint(&model, &a.out)?;
    eprintln!("reason checkpoint -> {}", a.out.display());
    if let Some(last) = history.epochs.last() {
        println!(
            "eval_accuracy,{:.4}\neval_macro_f1,{:.4}",
            last.eval_accuracy, last.eval_f1
        );
    }
    Ok(())
}

fn cmd_reason_eval(a: args::EvalArgs) -> Result<(), CliError> {
    let model = load_reason_checkpoint(&a.checkpoint)?;
    let reasons = read_reason_corpus(&a.corpus)?;
    let report = evaluate_reason(&model, &reasons)?;
    write_or_print(a.out.as_deref(), &report_to_csv(&report))
}

fn cmd_correlate(a: args::CorrelateArgs) -> Result<(), CliError> {
    let corpus = read_corpus(&a.corpus)?;
    let extractor = FeatureExtractor::new(shipped_lexicons(), None, FeatureConfig::correlation())?;
    let report = correlate_features(&corpus, &extractor)?;
    write_or_print(a.out.as_deref(), &correlation_to_csv(&report))
}

fn cmd_cluster_reasons(a: args::ClusterReasonsArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed)?;
    let text = fs::read_to_string(&a.reasons)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.reasons.display())))?;
    let texts: Vec<String> = text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if texts.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no reason texts found",
            a.reasons.display()
        )));
    }
    let vectors = load_embeddings(&a.embeddings)?;
    let report = cluster_reason_texts(&texts, &vectors, a.max_k, seed, 200)?;
    eprintln!(
        "chosen k = {}{}; {} texts dropped (no known tokens)",
        report.chosen.k,
        if report.chosen.clear { "" } else { " (no clear elbow)" },
        report.dropped
    );
    for (k, inertia) in &report.inertia_by_k {
        eprintln!("  k = {k:>2}: inertia {inertia:.4}");
    }
    let mut csv = String::from("reason_text,cluster\n");
    for (row, &text_idx) in report.kept.iter().enumerate() {
        let cluster = report.result.assignments[row];
        csv.push_str(&format!(
            "\"{}\",{}\n",
            texts[text_idx].replace('"', "\"\""),
            cluster
        ));
    }
    write_or_print(a.out.as_deref(), &csv)
}

fn cmd_distribution(a: args::DistributionArgs) -> Result<(), CliError> {
    let group_by = GroupBy::parse(&a.group_by)
        .ok_or_else(|| CliError::Usage(format!("unknown group-by '{}' (expected section or topic)", a.group_by)))?;
    let reasons = read_reason_corpus(&a.corpus)?;
    let topics: Option<HashMap<String, String>> = match &a.topics {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let table = reason_distribution(&reasons, group_by, topics.as_ref())?;
    for reason in crate::corpus::Reason::ALL {
        let rows = table.top_for(reason, a.top);
        if rows.is_empty() {
            continue;
        }
        let cells: Vec<String> = rows
            .iter()
            .map(|r| format!("{} ({})", r.group, r.count))
            .collect();
        eprintln!("{:<14} {}", reason.as_str(), cells.join(", "));
    }
    write_or_print(a.out.as_deref(), &distribution_to_csv(&table))
}
