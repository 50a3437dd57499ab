//! Training loop, data splits, and evaluation for the need and reason
//! models.

use serde::{Deserialize, Serialize};

use crate::analysis::{precision_recall_f1, EvaluationReport};
use crate::corpus::{Label, LabeledInstance, Reason, ReasonInstance};
use crate::encoder::{section_key, PretrainedVectors, Vocabulary};
use crate::numerics::rng::SplitMix64;
use crate::numerics::{AdamConfig, AdamState, Parameters};

use super::need::NeedModel;
use super::reason::ReasonModel;
use super::{ModelError, Variant};

/// Classification threshold on the need probability.
pub const DECISION_THRESHOLD: f64 = 0.5;

const SHUFFLE_SALT: u64 = 0x9D2C_5681_1F4A_33E7;

/// How a corpus is partitioned before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitSpec {
    /// 50% train / 50% eval (the neural protocol).
    Half,
    /// 50% train / 30% test / 20% validation (the baseline protocol).
    TrainTestValidation,
}

impl SplitSpec {
    pub fn parse(s: &str) -> Option<SplitSpec> {
        match s {
            "50/50" => Some(SplitSpec::Half),
            "50/30/20" => Some(SplitSpec::TrainTestValidation),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitSpec::Half => "50/50",
            SplitSpec::TrainTestValidation => "50/30/20",
        }
    }
}

/// Index partition of a corpus. `eval` is the monitoring/eval split (the
/// 50% eval half, or the 30% test slice); `validation` is only populated
/// for the three-way split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Deterministic seeded split: indices are shuffled with the run seed and
/// cut by the split fractions.
pub fn split_corpus(n: usize, spec: SplitSpec, seed: u64) -> SplitIndices {
    let mut indices: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed ^ SHUFFLE_SALT).shuffle(&mut indices);
    match spec {
        SplitSpec::Half => {
            let train_end = n / 2;
            SplitIndices {
                train: indices[..train_end].to_vec(),
                eval: indices[train_end..].to_vec(),
                validation: Vec::new(),
            }
        }
        SplitSpec::TrainTestValidation => {
            let train_end = n / 2;
            let test_end = train_end + (n * 3) / 10;
            SplitIndices {
                train: indices[..train_end].to_vec(),
                eval: indices[train_end..test_end].to_vec(),
                validation: indices[test_end..].to_vec(),
            }
        }
    }
}

/// Training hyperparameters shared by the need and reason models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub split: SplitSpec,
    pub freeze_pretrained: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 100,
            hidden_dim: 100,
            embed_dim: 100,
            max_len: 60,
            adam: AdamConfig::default(),
            seed: 42,
            split: SplitSpec::Half,
            freeze_pretrained: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("hidden_dim", self.hidden_dim),
            ("embed_dim", self.embed_dim),
            ("max_len", self.max_len),
        ] {
            if v == 0 {
                return Err(ModelError::BadConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches.
    pub train_loss: f64,
    pub eval_accuracy: f64,
    /// Positive-class F1 for the need model, macro-F1 for the reason model.
    pub eval_f1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub warnings: Vec<String>,
}

pub(crate) fn gather<'a, T>(items: &'a [T], indices: &[usize]) -> Vec<&'a T> {
    indices.iter().map(|&i| &items[i]).collect()
}

/// Trains a citation-need model. The vocabulary and section table come from
/// the train split only; per-epoch stats are measured on the eval split.
/// Fully deterministic given (corpus, config, variant, seed).
pub fn train_need(
    corpus: &[LabeledInstance],
    cfg: &TrainConfig,
    variant: Variant,
    pretrained: Option<&PretrainedVectors>,
) -> Result<(NeedModel, TrainHistory), ModelError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    if corpus.iter().all(|i| i.label == Label::Positive)
        || corpus.iter().all(|i| i.label == Label::Negative)
    {
        return Err(ModelError::SingleClass);
    }
    let split = split_corpus(corpus.len(), cfg.split, cfg.seed);
    let train = gather(corpus, &split.train);
    let eval = gather(corpus, &split.eval);
    if train.is_empty() || eval.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }

    let vocab = Vocabulary::build(
        train
            .iter()
            .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
    );
    let section_keys = collect_section_keys(train.iter().map(|i| &i.statement));
    let mut model = NeedModel::init(
        variant,
        vocab,
        &section_keys,
        cfg.embed_dim,
        cfg.hidden_dim,
        cfg.max_len,
        pretrained,
        cfg.freeze_pretrained,
        cfg.seed,
    )?;

    let mut adam = AdamState::new(cfg.adam)?;
    let mut shuffle_rng = SplitMix64::new(cfg.seed ^ SHUFFLE_SALT ^ 0xA5A5);
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&LabeledInstance> = chunk.iter().map(|&i| train[i]).collect();
            let loss = model.batch_loss_and_grad(&batch)?;
            adam.step(&mut model.param_slots_mut())?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        let report = evaluate_refs(&model, &eval)?;
        history.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / seen as f64,
            eval_accuracy: report.accuracy,
            eval_f1: positive_f1(&report),
        });
    }
    Ok((model, history))
}

pub(crate) fn collect_section_keys<'a>(
    statements: impl Iterator<Item = &'a crate::corpus::Statement>,
) -> Vec<String> {
    let mut keys = Vec::new();
    for s in statements {
        let key = section_key(&s.section_heading, s.is_lead);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys
}

/// Positive-class F1 from a binary report (class order [negative,
/// positive]).
pub(crate) fn positive_f1(report: &EvaluationReport) -> f64 {
    report.per_class[1].f1
}

pub(crate) fn binary_class_names() -> Vec<String> {
    vec!["negative".to_string(), "positive".to_string()]
}

fn evaluate_refs(model: &NeedModel, instances: &[&LabeledInstance]) -> Result<EvaluationReport, ModelError> {
    if instances.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    // confusion[true][predicted], class order [negative, positive].
    let mut confusion = vec![vec![0usize; 2]; 2];
    for instance in instances {
        let prob = model.forward(&instance.statement)?;
        let predicted = usize::from(prob >= DECISION_THRESHOLD);
        let actual = usize::from(instance.label == Label::Positive);
        confusion[actual][predicted] += 1;
    }
    precision_recall_f1(&confusion, &binary_class_names())
        .map_err(|e| ModelError::BadConfig(e.to_string()))
}

/// Evaluates a need model at the 0.5 threshold. Works unchanged for
/// cross-dataset evaluation: train on one corpus, pass another here.
pub fn evaluate(model: &NeedModel, instances: &[LabeledInstance]) -> Result<EvaluationReport, ModelError> {
    let refs: Vec<&LabeledInstance> = instances.iter().collect();
    evaluate_refs(model, &refs)
}

pub(crate) fn evaluate_reason_refs(
    model: &ReasonModel,
    instances: &[&ReasonInstance],
) -> Result<EvaluationReport, ModelError> {
    if instances.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let k = Reason::ALL.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for instance in instances {
        let probs = model.forward(&instance.statement)?;
        let predicted = argmax(&probs);
        confusion[instance.reason.index()][predicted] += 1;
    }
    let names: Vec<String> = Reason::ALL.iter().map(|r| r.as_str().to_string()).collect();
    precision_recall_f1(&confusion, &names).map_err(|e| ModelError::BadConfig(e.to_string()))
}

/// Evaluates a reason model with argmax predictions over the 8 classes.
pub fn evaluate_reason(
    model: &ReasonModel,
    instances: &[ReasonInstance],
) -> Result<EvaluationReport, ModelError> {
    let refs: Vec<&ReasonInstance> = instances.iter().collect();
    evaluate_reason_refs(model, &refs)
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
