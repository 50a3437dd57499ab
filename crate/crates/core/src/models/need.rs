//! The binary citation-need classifier.

use crate::corpus::{Label, LabeledInstance, Statement};
use crate::encoder::{PretrainedVectors, Vocabulary};
use crate::numerics::{
    binary_cross_entropy_from_prob, sigmoid_scalar, NumericsError, ParamSlot, Parameters,
};

use super::core::{component_seeds, CoreCache, DenseLayer, EncoderCore};
use super::{ModelError, Variant};

/// One of the four citation-need variants: an encoder core plus a
/// single-logit dense layer ending in a sigmoid.
#[derive(Debug, Clone)]
pub struct NeedModel {
    pub(crate) variant: Variant,
    pub(crate) core: EncoderCore,
    pub(crate) dense: DenseLayer,
    pub(crate) freeze_pretrained: bool,
    pub(crate) seed: u64,
}

impl NeedModel {
    /// Builds a freshly initialized model. `section_keys` are the section
    /// table entries (ignored for word-only variants); embeddings come from
    /// `pretrained` where available, otherwise seeded random rows.
    #[allow(clippy::too_many_arguments)]
    pub fn init(
        variant: Variant,
        vocab: Vocabulary,
        section_keys: &[String],
        embed_dim: usize,
        hidden_dim: usize,
        max_len: usize,
        pretrained: Option<&PretrainedVectors>,
        freeze_pretrained: bool,
        seed: u64,
    ) -> Result<NeedModel, ModelError> {
        if embed_dim == 0 || hidden_dim == 0 || max_len == 0 {
            return Err(ModelError::BadConfig(
                "embed_dim, hidden_dim and max_len must be positive".into(),
            ));
        }
        let core = EncoderCore::init(
            variant,
            vocab,
            section_keys,
            embed_dim,
            hidden_dim,
            max_len,
            pretrained,
            freeze_pretrained,
            seed,
        )?;
        let dense_seed = component_seeds(seed)[6];
        let dense = DenseLayer::init(1, core.rep_width(), dense_seed);
        Ok(NeedModel {
            variant,
            core,
            dense,
            freeze_pretrained,
            seed,
        })
    }

    pub(crate) fn from_parts(
        variant: Variant,
        core: EncoderCore,
        dense: DenseLayer,
        freeze_pretrained: bool,
        seed: u64,
    ) -> Result<NeedModel, ModelError> {
        core.check_variant(variant)?;
        if dense.out_dim() != 1 || dense.in_dim() != core.rep_width() {
            return Err(ModelError::BadConfig(format!(
                "dense layer is {}x{}, expected 1x{}",
                dense.out_dim(),
                dense.in_dim(),
                core.rep_width()
            )));
        }
        Ok(NeedModel {
            variant,
            core,
            dense,
            freeze_pretrained,
            seed,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
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

    pub fn freeze_pretrained(&self) -> bool {
        self.freeze_pretrained
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn forward_cached(&self, statement: &Statement) -> Result<(f64, CoreCache), ModelError> {
        self.core.check_variant(self.variant)?;
        let cache = self.core.forward_cached(statement)?;
        let logit = self.dense.forward(&cache.rep)[0];
        if !logit.is_finite() {
            return Err(ModelError::Numerics(NumericsError::NonFinite {
                context: "need logit".to_string(),
            }));
        }
        Ok((sigmoid_scalar(logit), cache))
    }

    /// Probability that the statement needs a citation.
    pub fn forward(&self, statement: &Statement) -> Result<f64, ModelError> {
        Ok(self.forward_cached(statement)?.0)
    }

    /// Probability plus one attention weight per (non-padding, untruncated)
    /// token. Errors on vanilla variants.
    pub fn predict_with_attention(
        &self,
        statement: &Statement,
    ) -> Result<(f64, Vec<f64>), ModelError> {
        if !self.variant.uses_attention() {
            return Err(ModelError::NoAttention(self.variant));
        }
        let (prob, cache) = self.forward_cached(statement)?;
        let attn = cache.attn.as_ref().expect("attention cache");
        let weights = attn.weights[..cache.embedded.n_tokens].to_vec();
        Ok((prob, weights))
    }

    /// Accumulates dense + encoder gradients for one statement whose loss
    /// gradient at the logit is `dlogit`.
    pub(crate) fn backward(&mut self, cache: &CoreCache, dlogit: f64) {
        let drep = self.dense.backward(&cache.rep, &[dlogit]);
        self.core.backward(cache, &drep);
    }

    /// Mean binary cross-entropy over the batch; leaves the mean-loss
    /// gradients in the parameter slots (previous gradients are cleared).
    pub fn batch_loss_and_grad(&mut self, batch: &[&LabeledInstance]) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        self.zero_grads();
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for instance in batch {
            let (prob, cache) = self.forward_cached(&instance.statement)?;
            let (loss, dlogit) =
                binary_cross_entropy_from_prob(prob, instance.label == Label::Positive)?;
            total += loss * scale;
            self.backward(&cache, dlogit * scale);
        }
        Ok(total)
    }
}

impl Parameters for NeedModel {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::encoder::{encode_statement, Vocabulary};
    use crate::numerics::grad_check;

    pub(crate) fn statement(text: &str, section: &str, is_lead: bool) -> Statement {
        Statement {
            article_id: "a".to_string(),
            section_heading: section.to_string(),
            is_lead,
            text: text.to_string(),
            tokens: tokenize(text),
            has_inline_citation: false,
            has_citation_needed_tag: false,
        }
    }

    fn fixture_batch() -> Vec<LabeledInstance> {
        let texts = [
            ("He claimed the result was wrong.", "Reception", false),
            ("The battle started in 1820 near the coast.", "History", false),
            ("It is a small town in the north.", "", true),
        ];
        texts
            .iter()
            .enumerate()
            .map(|(i, (text, section, is_lead))| LabeledInstance {
                statement: statement(text, section, *is_lead),
                label: if i % 2 == 0 {
                    Label::Positive
                } else {
                    Label::Negative
                },
                dataset: crate::corpus::DatasetId::Fa,
            })
            .collect()
    }

    fn fixture_model(variant: Variant, seed: u64) -> NeedModel {
        let batch = fixture_batch();
        let vocab = Vocabulary::build(
            batch
                .iter()
                .flat_map(|i| i.statement.tokens.iter().map(|t| t.as_str())),
        );
        let keys = vec![
            "<lead>".to_string(),
            "Reception".to_string(),
            "History".to_string(),
        ];
        NeedModel::init(variant, vocab, &keys, 6, 5, 12, None, true, seed).unwrap()
    }

    #[test]
    fn zero_dense_layer_outputs_half() {
        for variant in Variant::ALL {
            let mut model = fixture_model(variant, 3);
            model.dense.weight.value.fill(0.0);
            model.dense.bias.value.fill(0.0);
            let p = model
                .forward(&statement("Any sentence at all here.", "History", false))
                .unwrap();
            assert_eq!(p, 0.5, "variant {variant:?}");
        }
    }

    #[test]
    fn forward_is_pure() {
        let model = fixture_model(Variant::AttnWordSection, 9);
        let s = statement("He claimed the result was wrong.", "Reception", false);
        let a = model.forward(&s).unwrap();
        let b = model.forward(&s).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    // Compositional oracle: the full forward equals the hand-wired pipeline
    // (embed -> biGRU -> attention -> concat section -> dense).
    #[test]
    fn forward_matches_manual_pipeline() {
        let model = fixture_model(Variant::AttnWordSection, 21);
        let s = statement("The battle started in 1820 near the coast.", "History", false);
        let encoded = encode_statement(
            &s,
            &model.core.word_emb,
            model.core.max_len,
            &model.core.gru_fwd,
            model.core.gru_bwd.as_ref(),
            model.core.attention.as_ref(),
            model.core.section.as_ref(),
        )
        .unwrap();
        let mut rep = encoded.context.clone().unwrap();
        rep.extend_from_slice(encoded.section.as_ref().unwrap());
        let logit = model.dense.forward(&rep)[0];
        let expected = sigmoid_scalar(logit);
        let actual = model.forward(&s).unwrap();
        assert!((actual - expected).abs() < 1e-15);
    }

    #[test]
    fn attention_weights_align_with_tokens() {
        let model = fixture_model(Variant::AttnWord, 5);
        let s = statement("He claimed the result was wrong.", "Reception", false);
        let (_, weights) = model.predict_with_attention(&s).unwrap();
        assert_eq!(weights.len(), s.tokens.len());
        let sum: f64 = weights.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        let vanilla = fixture_model(Variant::RnnWord, 5);
        assert!(matches!(
            vanilla.predict_with_attention(&s),
            Err(ModelError::NoAttention(_))
        ));
    }

    #[test]
    fn every_variant_passes_whole_model_gradient_check() {
        let batch = fixture_batch();
        let refs: Vec<&LabeledInstance> = batch.iter().collect();
        for variant in Variant::ALL {
            let mut model = fixture_model(variant, 1234);
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
                "variant {variant:?}: max rel err {} at {:?}[{}] over {} coords",
                report.max_rel_err, report.worst_slot, report.worst_coord, report.coords_checked
            );
        }
    }

    #[test]
    fn empty_statement_is_an_error() {
        let model = fixture_model(Variant::RnnWord, 2);
        let mut s = statement("x", "History", false);
        s.tokens.clear();
        assert!(matches!(
            model.forward(&s),
            Err(ModelError::EmptyStatement)
        ));
    }
}
