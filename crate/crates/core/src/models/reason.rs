//! The 8-class citation-reason model: the attention+section encoder with
//! the dense layer swapped for an 8-way softmax head, fine-tuned from a
//! pretrained binary model or trained from scratch.

use crate::corpus::{Reason, ReasonInstance, Statement};
use crate::encoder::{PretrainedVectors, Vocabulary};
use crate::numerics::rng::SplitMix64;
use crate::numerics::{softmax, AdamState, ParamSlot, Parameters, PROB_FLOOR};

use super::core::{component_seeds, CoreCache, DenseLayer, EncoderCore};
use super::need::NeedModel;
use super::train::{
    argmax, collect_section_keys, evaluate_reason_refs, gather, split_corpus, EpochStats,
    TrainConfig, TrainHistory,
};
use super::{ModelError, Variant};

pub const REASON_CLASSES: usize = 8;

/// Attention+section encoder plus an 8-logit softmax head.
#[derive(Debug, Clone)]
pub struct ReasonModel {
    pub(crate) core: EncoderCore,
    pub(crate) dense: DenseLayer,
    pub(crate) class_weights: [f64; REASON_CLASSES],
    pub(crate) freeze_pretrained: bool,
    pub(crate) seed: u64,
}

impl ReasonModel {
    /// Starts from a pretrained binary model: the whole encoder is copied,
    /// only the dense head is freshly initialized (from the same stream a
    /// from-scratch run with this seed would use).
    pub fn from_pretrained(pretrained: &NeedModel, seed: u64) -> Result<ReasonModel, ModelError> {
        if pretrained.variant() != Variant::AttnWordSection {
            return Err(ModelError::WrongPretrainVariant(pretrained.variant()));
        }
        let core = pretrained.core.clone();
        let dense_seed = component_seeds(seed)[6];
        let dense = DenseLayer::init(REASON_CLASSES, core.rep_width(), dense_seed);
        Ok(ReasonModel {
            core,
            dense,
            class_weights: [1.0; REASON_CLASSES],
            freeze_pretrained: pretrained.freeze_pretrained,
            seed,
        })
    }

    /// Fresh encoder and head (the "no pre-training" comparison row).
    #[allow(clippy::too_many_arguments)]
    pub fn init_fresh(
        vocab: Vocabulary,
        section_keys: &[String],
        embed_dim: usize,
        hidden_dim: usize,
        max_len: usize,
        pretrained_vectors: Option<&PretrainedVectors>,
        freeze_pretrained: bool,
        seed: u64,
    ) -> Result<ReasonModel, ModelError> {
        let core = EncoderCore::init(
            Variant::AttnWordSection,
            vocab,
            section_keys,
            embed_dim,
            hidden_dim,
            max_len,
            pretrained_vectors,
            freeze_pretrained,
            seed,
        )?;
        let dense_seed = component_seeds(seed)[6];
        let dense = DenseLayer::init(REASON_CLASSES, core.rep_width(), dense_seed);
        Ok(ReasonModel {
            core,
            dense,
            class_weights: [1.0; REASON_CLASSES],
            freeze_pretrained,
            seed,
        })
    }

    pub(crate) fn from_parts(
        core: EncoderCore,
        dense: DenseLayer,
        class_weights: [f64; REASON_CLASSES],
        freeze_pretrained: bool,
        seed: u64,
    ) -> Result<ReasonModel, ModelError> {
        core.check_variant(Variant::AttnWordSection)?;
        if dense.out_dim() != REASON_CLASSES || dense.in_dim() != core.rep_width() {
            return Err(ModelError::BadConfig(format!(
                "dense layer is {}x{}, expected {}x{}",
                dense.out_dim(),
                dense.in_dim(),
                REASON_CLASSES,
                core.rep_width()
            )));
        }
        Ok(ReasonModel {
            core,
            dense,
            class_weights,
            freeze_pretrained,
            seed,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        self.core.word_emb.vocab()
    }

    pub fn embed_dim(&self) -> usize {
        self.core.word_emb.dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.core.hidden_dim
    }

    pub fn max_len(&self) -> usize {
        self.core.max_len
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_weights(&self) -> &[f64; REASON_CLASSES] {
        &self.class_weights
    }

    fn forward_cached(&self, statement: &Statement) -> Result<(Vec<f64>, CoreCache), ModelError> {
        let cache = self.core.forward_cached(statement)?;
        let logits = self.dense.forward(&cache.rep);
        let probs = softmax(&logits, None)?;
        Ok((probs, cache))
    }

    /// Softmax distribution over the eight reasons.
    pub fn forward(&self, statement: &Statement) -> Result<Vec<f64>, ModelError> {
        Ok(self.forward_cached(statement)?.0)
    }

    pub fn predict(&self, statement: &Statement) -> Result<Reason, ModelError> {
        let probs = self.forward(statement)?;
        Ok(Reason::from_index(argmax(&probs)).expect("8 classes"))
    }

    /// Distribution plus one attention weight per token.
    pub fn predict_with_attention(
        &self,
        statement: &Statement,
    ) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let (probs, cache) = self.forward_cached(statement)?;
        let attn = cache.attn.as_ref().expect("attention cache");
        let weights = attn.weights[..cache.embedded.n_tokens].to_vec();
        Ok((probs, weights))
    }

    /// Mean class-weighted cross-entropy over the batch, gradients left in
    /// the slots.
    pub fn batch_loss_and_grad(&mut self, batch: &[&ReasonInstance]) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        self.zero_grads();
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for instance in batch {
            let (probs, cache) = self.forward_cached(&instance.statement)?;
            let target = instance.reason.index();
            let weight = self.class_weights[target];
            total += -probs[target].max(PROB_FLOOR).ln() * weight * scale;
            // d(loss)/d(logits) for weighted softmax cross-entropy.
            let mut dlogits = probs;
            dlogits[target] -= 1.0;
            for d in dlogits.iter_mut() {
                *d *= weight * scale;
            }
            let drep = self.dense.backward(&cache.rep, &dlogits);
            self.core.backward(&cache, &drep);
        }
        Ok(total)
    }
}

impl Parameters for ReasonModel {
    fn param_slots(&self) -> Vec<&ParamSlot> {
        let mut slots = self.core.slots();
        slots.extend(self.dense.slots());
        slots
    }

    fn param_slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        let mut slots = self.core.slots_mut();
        slots.extend(self.dense.slots_mut());
        slots
    }
}

/// Inverse-frequency class weights w_c = N / (C * N_c) computed over the
/// classes present; absent classes get weight 0 and a warning.
pub fn class_weights(train: &[&ReasonInstance]) -> ([f64; REASON_CLASSES], Vec<String>) {
    let mut counts = [0usize; REASON_CLASSES];
    for instance in train {
        counts[instance.reason.index()] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    let total = train.len() as f64;
    let mut weights = [0.0; REASON_CLASSES];
    let mut warnings = Vec::new();
    for (i, &count) in counts.iter().enumerate() {
        if count == 0 {
            warnings.push(format!(
                "reason class '{}' absent from training data; weight computed over {present} present classes",
                Reason::ALL[i]
            ));
        } else {
            weights[i] = total / (present as f64 * count as f64);
        }
    }
    (weights, warnings)
}

fn train_reason_loop(
    mut model: ReasonModel,
    reasons: &[ReasonInstance],
    cfg: &TrainConfig,
) -> Result<(ReasonModel, TrainHistory), ModelError> {
    let split = split_corpus(reasons.len(), cfg.split, cfg.seed);
    let train = gather(reasons, &split.train);
    let eval = gather(reasons, &split.eval);
    if train.is_empty() || eval.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let (weights, warnings) = class_weights(&train);
    model.class_weights = weights;
    let mut history = TrainHistory {
        warnings,
        ..TrainHistory::default()
    };

    let mut adam = AdamState::new(cfg.adam)?;
    let mut shuffle_rng = SplitMix64::new(cfg.seed ^ 0x5EED_0F0E_7A11_0CAF);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&ReasonInstance> = chunk.iter().map(|&i| train[i]).collect();
            let loss = model.batch_loss_and_grad(&batch)?;
            adam.step(&mut model.param_slots_mut())?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        let report = evaluate_reason_refs(&model, &eval)?;
        history.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / seen as f64,
            eval_accuracy: report.accuracy,
            eval_f1: report.macro_f1,
        });
    }
    Ok((model, history))
}

fn check_reason_corpus(reasons: &[ReasonInstance]) -> Result<(), ModelError> {
    if reasons.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let first = reasons[0].reason;
    if reasons.iter().all(|r| r.reason == first) {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}

/// Fine-tunes the 8-class head (and the whole encoder) from a pretrained
/// binary model. The vocabulary and section table come from the
/// checkpoint.
pub fn fine_tune_reason(
    pretrained: &NeedModel,
    reasons: &[ReasonInstance],
    cfg: &TrainConfig,
) -> Result<(ReasonModel, TrainHistory), ModelError> {
    cfg.validate()?;
    check_reason_corpus(reasons)?;
    let model = ReasonModel::from_pretrained(pretrained, cfg.seed)?;
    train_reason_loop(model, reasons, cfg)
}

/// Trains the reason model with no pretraining: vocabulary, section table,
/// and all weights start from the reason corpus and the seed.
pub fn train_reason_from_scratch(
    reasons: &[ReasonInstance],
    cfg: &TrainConfig,
    pretrained_vectors: Option<&PretrainedVectors>,
) -> Result<(ReasonModel, TrainHistory), ModelError> {
    cfg.validate()?;
    check_reason_corpus(reasons)?;
    let split = split_corpus(reasons.len(), cfg.split, cfg.seed);
    let train = gather(reasons, &split.train);
    let vocab = Vocabulary::build(
        train
            .iter()
            .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
    );
    let section_keys = collect_section_keys(train.iter().map(|i| &i.statement));
    let model = ReasonModel::init_fresh(
        vocab,
        &section_keys,
        cfg.embed_dim,
        cfg.hidden_dim,
        cfg.max_len,
        pretrained_vectors,
        cfg.freeze_pretrained,
        cfg.seed,
    )?;
    train_reason_loop(model, reasons, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::numerics::{grad_check, NumericsError};

    fn reason_statement(text: &str, section: &str) -> Statement {
        Statement {
            article_id: "a".to_string(),
            section_heading: section.to_string(),
            is_lead: false,
            text: text.to_string(),
            tokens: tokenize(text),
            has_inline_citation: true,
            has_citation_needed_tag: false,
        }
    }

    fn fixture_reasons() -> Vec<ReasonInstance> {
        let rows = [
            ("He said the quote was real.", Reason::Quotation),
            ("The rate rose by ten percent.", Reason::Statistics),
            ("The claim sparked a dispute.", Reason::Controversial),
        ];
        rows.iter()
            .map(|(text, reason)| ReasonInstance {
                statement: reason_statement(text, "History"),
                reason: *reason,
            })
            .collect()
    }

    fn fixture_model(seed: u64) -> ReasonModel {
        let corpus = fixture_reasons();
        let vocab = Vocabulary::build(
            corpus
                .iter()
                .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
        );
        ReasonModel::init_fresh(
            vocab,
            &["History".to_string()],
            6,
            5,
            10,
            None,
            true,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn softmax_output_sums_to_one() {
        let model = fixture_model(4);
        let probs = model
            .forward(&reason_statement("He said the quote was real.", "History"))
            .unwrap();
        assert_eq!(probs.len(), REASON_CLASSES);
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn argmax_invariant_under_logit_shift() {
        let model = fixture_model(4);
        let s = reason_statement("The rate rose by ten percent.", "History");
        let cache = model.core.forward_cached(&s).unwrap();
        let logits = model.dense.forward(&cache.rep);
        let probs = softmax(&logits, None).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|l| l + 123.4).collect();
        let probs_shifted = softmax(&shifted, None).unwrap();
        assert_eq!(argmax(&probs), argmax(&probs_shifted));
    }

    #[test]
    fn reason_head_passes_gradient_check() {
        let corpus = fixture_reasons();
        let refs: Vec<&ReasonInstance> = corpus.iter().collect();
        let mut model = fixture_model(77);
        // Non-uniform weights exercise the weighted-loss gradient too.
        model.class_weights = [1.0, 2.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0];
        let report = grad_check(
            &mut model,
            |m| {
                m.batch_loss_and_grad(&refs)
                    .map_err(|e| NumericsError::InvalidArgument(e.to_string()))
            },
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(
            report.pass,
            "max rel err {} at {:?}",
            report.max_rel_err, report.worst_slot
        );
    }

    #[test]
    fn class_weights_follow_inverse_frequency() {
        let corpus = fixture_reasons(); // one instance each of 3 classes
        let refs: Vec<&ReasonInstance> = corpus.iter().collect();
        let (weights, warnings) = class_weights(&refs);
        // N = 3, C = 3 present classes, N_c = 1 -> weight 1.0 each.
        assert!((weights[Reason::Quotation.index()] - 1.0).abs() < 1e-12);
        assert_eq!(weights[Reason::Historical.index()], 0.0);
        assert_eq!(warnings.len(), 5); // 5 absent classes
    }

    #[test]
    fn fine_tune_requires_attention_section_variant() {
        let corpus = fixture_reasons();
        let vocab = Vocabulary::build(
            corpus
                .iter()
                .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
        );
        let vanilla = NeedModel::init(
            Variant::RnnWord,
            vocab,
            &[],
            6,
            5,
            10,
            None,
            true,
            1,
        )
        .unwrap();
        assert!(matches!(
            ReasonModel::from_pretrained(&vanilla, 1),
            Err(ModelError::WrongPretrainVariant(_))
        ));
    }

    #[test]
    fn pretrained_and_fresh_share_dense_init() {
        let corpus = fixture_reasons();
        let vocab = Vocabulary::build(
            corpus
                .iter()
                .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
        );
        let keys = vec!["History".to_string()];
        let pretrained = NeedModel::init(
            Variant::AttnWordSection,
            vocab.clone(),
            &keys,
            6,
            5,
            10,
            None,
            true,
            999, // different training seed
        )
        .unwrap();
        let from_ckpt = ReasonModel::from_pretrained(&pretrained, 31).unwrap();
        let fresh =
            ReasonModel::init_fresh(vocab, &keys, 6, 5, 10, None, true, 31).unwrap();
        // Dense heads are identical (same seed stream)...
        assert_eq!(from_ckpt.dense.weight.value, fresh.dense.weight.value);
        assert_eq!(from_ckpt.dense.bias.value, fresh.dense.bias.value);
        // ...while encoder weights differ (pretrained vs fresh init).
        assert_ne!(
            from_ckpt.core.gru_fwd.w_update.value,
            fresh.core.gru_fwd.w_update.value
        );
    }
}
