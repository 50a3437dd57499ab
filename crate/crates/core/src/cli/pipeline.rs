//! Declarative pipeline: build -> train -> evaluate -> report from one
//! TOML file, with content-addressed stage caching.
//!
//! Each stage's inputs (its config section, its input files, and the
//! upstream stage hash) are hashed; a stage whose hash matches the state
//! file and whose outputs still exist is skipped unless `--force`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    correlate_features, correlation_to_csv, render_attention_report, report_to_csv,
    ExplainedModel,
};
use crate::baselines::{shipped_lexicons, FeatureConfig, FeatureExtractor};
use crate::corpus::{
    build_fa_dataset, build_lqn_dataset, build_rnd_dataset, read_corpus, write_corpus, DatasetId,
    LabeledInstance, DEFAULT_RND_TOTAL,
};
use crate::models::{
    evaluate, load_need_checkpoint, save_need_checkpoint, split_corpus, train_need, SplitSpec,
    TrainConfig, Variant,
};
use crate::numerics::AdamConfig;

use super::args::PipelineArgs;
use super::{load_embeddings, print_history, read_articles_jsonl, resolve_seed, CliError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineConfig {
    #[serde(default)]
    out_dir: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    build: Option<BuildStage>,
    train: TrainStage,
    #[serde(default)]
    report: Option<ReportStage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildStage {
    articles: PathBuf,
    dataset: String,
    #[serde(default)]
    positives: Option<usize>,
    #[serde(default)]
    negatives: Option<usize>,
    #[serde(default)]
    total: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainStage {
    #[serde(default)]
    corpus: Option<PathBuf>,
    variant: String,
    #[serde(default = "default_epochs")]
    epochs: usize,
    #[serde(default = "default_batch")]
    batch: usize,
    #[serde(default = "default_hidden")]
    hidden: usize,
    #[serde(default = "default_embed")]
    embed_dim: usize,
    #[serde(default = "default_max_len")]
    max_len: usize,
    #[serde(default = "default_learning_rate")]
    learning_rate: f64,
    #[serde(default)]
    embeddings: Option<PathBuf>,
    #[serde(default = "default_split")]
    split: String,
}

fn default_epochs() -> usize {
    10
}
fn default_batch() -> usize {
    100
}
fn default_hidden() -> usize {
    100
}
fn default_embed() -> usize {
    100
}
fn default_max_len() -> usize {
    60
}
fn default_learning_rate() -> f64 {
    0.001
}
fn default_split() -> String {
    "50/50".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportStage {
    #[serde(default)]
    correlations: bool,
    #[serde(default)]
    attention: bool,
    #[serde(default = "default_attention_limit")]
    attention_limit: usize,
}

fn default_attention_limit() -> usize {
    10
}

fn hash_file(path: &Path) -> Result<String, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn stage_hash(name: &str, config_json: &str, inputs: &[String], upstream: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(name.as_bytes());
    hasher.update(config_json.as_bytes());
    for i in inputs {
        hasher.update(i.as_bytes());
    }
    hasher.update(upstream.as_bytes());
    hex(&hasher.finalize())
}

type StateMap = HashMap<String, String>;

fn load_state(path: &Path) -> StateMap {
    fs::read_to_string(path)
        .ok()
        .and_then(|text| serde_json::from_str(&text).ok())
        .unwrap_or_default()
}

fn save_state(path: &Path, state: &StateMap) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(state)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

struct StageRunner {
    state_path: PathBuf,
    state: StateMap,
    force: bool,
}

impl StageRunner {
    /// Runs `work` unless the stage hash matches the recorded one and all
    /// outputs exist. Returns true when the stage was skipped.
    fn run(
        &mut self,
        name: &str,
        hash: String,
        outputs: &[&Path],
        work: impl FnOnce() -> Result<(), CliError>,
    ) -> Result<bool, CliError> {
        let cached = !self.force
            && self.state.get(name) == Some(&hash)
            && outputs.iter().all(|p| p.exists());
        if cached {
            eprintln!("[pipeline] {name}: cached, skipping");
            return Ok(true);
        }
        eprintln!("[pipeline] {name}: running");
        work()?;
        self.state.insert(name.to_string(), hash);
        save_state(&self.state_path, &self.state)?;
        Ok(false)
    }
}

pub fn run_pipeline(args: PipelineArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.config.display())))?;
    let config: PipelineConfig = toml::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.config.display())))?;

    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| CliError::Usage("out_dir missing (set it in the config or pass --out)".into()))?;
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    let seed = match args.seed {
        Some(s) => s,
        None => match config.seed {
            Some(s) => s,
            None => resolve_seed(None)?,
        },
    };

    let variant = Variant::parse(&config.train.variant).ok_or_else(|| {
        CliError::Data(format!("train.variant '{}' is not a variant", config.train.variant))
    })?;
    let split = SplitSpec::parse(&config.train.split)
        .ok_or_else(|| CliError::Data(format!("train.split '{}' is not a split", config.train.split)))?;

    let corpus_path = match (&config.build, &config.train.corpus) {
        (Some(_), _) => out_dir.join("corpus.jsonl"),
        (None, Some(path)) => path.clone(),
        (None, None) => {
            return Err(CliError::Data(
                "config needs a [build] stage or train.corpus".into(),
            ))
        }
    };
    let model_path = out_dir.join("model.ckpt");
    let eval_path = out_dir.join("evaluation.csv");

    let mut runner = StageRunner {
        state_path: out_dir.join("pipeline-state.json"),
        state: load_state(&out_dir.join("pipeline-state.json")),
        force: args.force,
    };

    // ---- build ----------------------------------------------------------
    let mut upstream = String::new();
    if let Some(build) = &config.build {
        let config_json = serde_json::to_string(build).map_err(|e| CliError::Internal(e.to_string()))?;
        let inputs = vec![hash_file(&build.articles)?, seed.to_string()];
        let hash = stage_hash("build", &config_json, &inputs, "");
        let corpus_out = corpus_path.clone();
        let build = build.clone();
        runner.run("build", hash.clone(), &[&corpus_out], || {
            let dataset = DatasetId::parse(&build.dataset)
                .ok_or_else(|| CliError::Data(format!("build.dataset '{}' is not a dataset", build.dataset)))?;
            let articles = read_articles_jsonl(&build.articles)?;
            let instances = match dataset {
                DatasetId::Fa => build_fa_dataset(
                    &articles,
                    build.positives.unwrap_or(0),
                    build.negatives.unwrap_or(0),
                    seed,
                )?,
                DatasetId::Lqn => build_lqn_dataset(
                    &articles,
                    build.positives.unwrap_or(0),
                    build.negatives.unwrap_or(0),
                    seed,
                )?,
                DatasetId::Rnd => {
                    build_rnd_dataset(&articles, build.total.unwrap_or(DEFAULT_RND_TOTAL), seed)?
                }
            };
            write_corpus(&instances, &corpus_out)?;
            Ok(())
        })?;
        upstream = hash;
    }

    // ---- train ----------------------------------------------------------
    let train_cfg = TrainConfig {
        epochs: config.train.epochs,
        batch_size: config.train.batch,
        hidden_dim: config.train.hidden,
        embed_dim: config.train.embed_dim,
        max_len: config.train.max_len,
        adam: AdamConfig::with_learning_rate(config.train.learning_rate),
        seed,
        split,
        freeze_pretrained: true,
    };
    let config_json =
        serde_json::to_string(&config.train).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut inputs = vec![hash_file(&corpus_path)?, seed.to_string()];
    if let Some(emb) = &config.train.embeddings {
        inputs.push(hash_file(emb)?);
    }
    let train_hash = stage_hash("train", &config_json, &inputs, &upstream);
    {
        let corpus_in = corpus_path.clone();
        let model_out = model_path.clone();
        let embeddings = config.train.embeddings.clone();
        let train_cfg_stage = train_cfg.clone();
        runner.run("train", train_hash.clone(), &[&model_path], move || {
            let corpus = read_corpus(&corpus_in)?;
            let vectors = embeddings.as_deref().map(load_embeddings).transpose()?;
            let (model, history) = train_need(&corpus, &train_cfg_stage, variant, vectors.as_ref())?;
            print_history(&history);
            save_need_checkpoint(&model, &model_out)?;
            Ok(())
        })?;
    }

    // ---- evaluate -------------------------------------------------------
    let eval_hash = stage_hash("evaluate", "", &[hash_file(&model_path)?], &train_hash);
    {
        let corpus_in = corpus_path.clone();
        let model_in = model_path.clone();
        let eval_out = eval_path.clone();
        runner.run("evaluate", eval_hash.clone(), &[&eval_path], move || {
            let corpus = read_corpus(&corpus_in)?;
            let model = load_need_checkpoint(&model_in)?;
            let eval_split = eval_instances(&corpus, split, seed);
            let report = evaluate(&model, &eval_split)?;
            fs::write(&eval_out, report_to_csv(&report))
                .map_err(|e| CliError::Data(format!("{}: {e}", eval_out.display())))?;
            Ok(())
        })?;
    }

    // ---- report ---------------------------------------------------------
    if let Some(report) = &config.report {
        let config_json =
            serde_json::to_string(report).map_err(|e| CliError::Internal(e.to_string()))?;
        let hash = stage_hash("report", &config_json, &[hash_file(&model_path)?], &eval_hash);
        let mut outputs: Vec<PathBuf> = Vec::new();
        if report.correlations {
            outputs.push(out_dir.join("correlations.csv"));
        }
        if report.attention {
            outputs.push(out_dir.join("attention.html"));
        }
        let output_refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
        let report = report.clone();
        let corpus_in = corpus_path.clone();
        let model_in = model_path.clone();
        let out_dir_in = out_dir.clone();
        runner.run("report", hash, &output_refs, move || {
            let corpus = read_corpus(&corpus_in)?;
            if report.correlations {
                let extractor =
                    FeatureExtractor::new(shipped_lexicons(), None, FeatureConfig::correlation())?;
                let correlations = correlate_features(&corpus, &extractor)?;
                let path = out_dir_in.join("correlations.csv");
                fs::write(&path, correlation_to_csv(&correlations))
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            }
            if report.attention {
                let model = load_need_checkpoint(&model_in)?;
                let statements: Vec<_> = eval_instances(&corpus, split, seed)
                    .into_iter()
                    .take(report.attention_limit)
                    .map(|i| i.statement)
                    .collect();
                render_attention_report(
                    &ExplainedModel::Need(&model),
                    &statements,
                    out_dir_in.join("attention.html"),
                )?;
            }
            Ok(())
        })?;
    }

    eprintln!("[pipeline] done -> {}", out_dir.display());
    Ok(())
}

/// The eval portion of the corpus under the same deterministic split the
/// training run used.
fn eval_instances(corpus: &[LabeledInstance], split: SplitSpec, seed: u64) -> Vec<LabeledInstance> {
    let indices = split_corpus(corpus.len(), split, seed);
    indices.eval.iter().map(|&i| corpus[i].clone()).collect()
}
