//! Shared encoder stack and dense output layer used by both the binary
//! need model and the reason model.

use crate::corpus::Statement;
use crate::encoder::{
    bidirectional_encode_cached, concat_states, embed_tokens, glorot, global_attention_backward,
    global_attention_cached, run_gru_backward, run_gru_cached, AttentionCache, AttentionParams,
    EmbeddedStatement, GruParams, GruRunCache, PretrainedVectors, RunDirection, SectionCache,
    SectionEncoder, SectionEmbeddings, Vocabulary, WordEmbeddings,
};
use crate::numerics::rng::SplitMix64;
use crate::numerics::{ParamSlot, Tensor};

use super::{ModelError, Variant};

/// Fixed-order per-component seeds derived from the run seed. Components
/// that a variant does not use still consume their stream entry, so the
/// dense layer sees the same stream no matter which encoder came before it
/// (this is what makes "same seed, same dense init" hold across the
/// pretrained and from-scratch reason paths).
pub(crate) fn component_seeds(seed: u64) -> [u64; 7] {
    let mut rng = SplitMix64::new(seed);
    let mut out = [0u64; 7];
    for slot in out.iter_mut() {
        *slot = rng.next_u64();
    }
    out
}

/// Linear output layer: `logits = weight * rep + bias`.
#[derive(Debug, Clone)]
pub(crate) struct DenseLayer {
    pub weight: ParamSlot,
    pub bias: ParamSlot,
}

impl DenseLayer {
    pub fn init(out_dim: usize, in_dim: usize, seed: u64) -> DenseLayer {
        let mut rng = SplitMix64::new(seed);
        DenseLayer {
            weight: ParamSlot::new(
                "dense.weight",
                glorot(&[out_dim, in_dim], in_dim, out_dim, &mut rng),
            ),
            bias: ParamSlot::new("dense.bias", Tensor::zeros(&[out_dim])),
        }
    }

    pub fn from_tensors(weight: Tensor, bias: Tensor) -> DenseLayer {
        DenseLayer {
            weight: ParamSlot::new("dense.weight", weight),
            bias: ParamSlot::new("dense.bias", bias),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.weight.value.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.value.cols()
    }

    pub fn forward(&self, rep: &[f64]) -> Vec<f64> {
        let mut logits = self.weight.value.matvec(rep);
        for (l, b) in logits.iter_mut().zip(self.bias.value.data()) {
            *l += b;
        }
        logits
    }

    /// Accumulates gradients and returns d(loss)/d(rep).
    pub fn backward(&mut self, rep: &[f64], dlogits: &[f64]) -> Vec<f64> {
        self.weight.grad.add_outer(dlogits, rep);
        for (g, d) in self.bias.grad.data_mut().iter_mut().zip(dlogits) {
            *g += d;
        }
        self.weight.value.matvec_transposed(dlogits)
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        vec![&self.weight, &self.bias]
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Word embeddings, optional section encoder, statement GRU(s), and
/// optional attention, producing the representation the dense layer sees.
#[derive(Debug, Clone)]
pub(crate) struct EncoderCore {
    pub word_emb: WordEmbeddings,
    pub section: Option<SectionEncoder>,
    pub gru_fwd: GruParams,
    pub gru_bwd: Option<GruParams>,
    pub attention: Option<AttentionParams>,
    pub hidden_dim: usize,
    pub max_len: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CoreCache {
    pub embedded: EmbeddedStatement,
    pub fwd: GruRunCache,
    pub bwd: Option<GruRunCache>,
    /// Concatenated states the attention consumed (attention variants).
    pub attn_states: Option<Tensor>,
    pub attn: Option<AttentionCache>,
    pub section: Option<SectionCache>,
    pub rep: Vec<f64>,
}

impl EncoderCore {
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
    ) -> Result<EncoderCore, ModelError> {
        let seeds = component_seeds(seed);
        let word_emb = match pretrained {
            Some(vectors) => WordEmbeddings::from_pretrained(
                vocab,
                vectors,
                &mut SplitMix64::new(seeds[0]),
                freeze_pretrained,
            )?,
            None => WordEmbeddings::fresh(vocab, embed_dim, &mut SplitMix64::new(seeds[0])),
        };
        let embed_dim = word_emb.dim();
        let section = if variant.uses_section() {
            let embeddings = SectionEmbeddings::build(
                section_keys.iter().map(|s| s.as_str()),
                embed_dim,
                &mut SplitMix64::new(seeds[1]),
            );
            let gru = GruParams::init(
                "section_gru",
                embed_dim,
                hidden_dim,
                &mut SplitMix64::new(seeds[2]),
            );
            Some(SectionEncoder { embeddings, gru })
        } else {
            None
        };
        let gru_fwd = GruParams::init(
            "gru_fwd",
            embed_dim,
            hidden_dim,
            &mut SplitMix64::new(seeds[3]),
        );
        let (gru_bwd, attention) = if variant.uses_attention() {
            let bwd = GruParams::init(
                "gru_bwd",
                embed_dim,
                hidden_dim,
                &mut SplitMix64::new(seeds[4]),
            );
            let attn = AttentionParams::init(
                "attention",
                2 * hidden_dim,
                &mut SplitMix64::new(seeds[5]),
            );
            (Some(bwd), Some(attn))
        } else {
            (None, None)
        };
        Ok(EncoderCore {
            word_emb,
            section,
            gru_fwd,
            gru_bwd,
            attention,
            hidden_dim,
            max_len,
        })
    }

    /// Width of the statement part of the representation.
    pub fn statement_width(&self) -> usize {
        if self.attention.is_some() {
            2 * self.hidden_dim
        } else {
            self.hidden_dim
        }
    }

    /// Width of the full representation the dense layer consumes.
    pub fn rep_width(&self) -> usize {
        self.statement_width() + if self.section.is_some() { self.hidden_dim } else { 0 }
    }

    /// Checks structural consistency against the variant tag.
    pub fn check_variant(&self, variant: Variant) -> Result<(), ModelError> {
        if variant.uses_section() && self.section.is_none() {
            return Err(ModelError::MissingComponent("section encoder"));
        }
        if variant.uses_attention() {
            if self.gru_bwd.is_none() {
                return Err(ModelError::MissingComponent("backward GRU"));
            }
            if self.attention.is_none() {
                return Err(ModelError::MissingComponent("attention"));
            }
        }
        Ok(())
    }

    pub fn forward_cached(&self, statement: &Statement) -> Result<CoreCache, ModelError> {
        let embedded = embed_tokens(&statement.tokens, &self.word_emb, self.max_len)?;
        if embedded.n_tokens == 0 {
            return Err(ModelError::EmptyStatement);
        }
        let (fwd, bwd, attn_states, attn, statement_rep) = match (&self.gru_bwd, &self.attention) {
            (Some(p_bwd), Some(p_attn)) => {
                let (fwd, bwd) = bidirectional_encode_cached(
                    &embedded.matrix,
                    &embedded.mask,
                    &self.gru_fwd,
                    p_bwd,
                )?;
                let states = concat_states(&fwd.states, &bwd.states);
                let attn = global_attention_cached(&states, &embedded.mask, p_attn)?;
                let rep = attn.context.clone();
                (fwd, Some(bwd), Some(states), Some(attn), rep)
            }
            (None, None) => {
                let fwd = run_gru_cached(
                    &embedded.matrix,
                    &embedded.mask,
                    &self.gru_fwd,
                    RunDirection::Forward,
                )?;
                let rep = fwd.states.row(self.max_len - 1).to_vec();
                (fwd, None, None, None, rep)
            }
            _ => return Err(ModelError::MissingComponent("attention")),
        };
        let section = match &self.section {
            Some(enc) => Some(enc.encode_cached(&statement.section_heading, statement.is_lead)?),
            None => None,
        };
        let mut rep = statement_rep;
        if let Some(s) = &section {
            rep.extend_from_slice(&s.step.h);
        }
        Ok(CoreCache {
            embedded,
            fwd,
            bwd,
            attn_states,
            attn,
            section,
            rep,
        })
    }

    /// Backward from the representation gradient down to every encoder
    /// parameter (including trainable embedding rows).
    pub fn backward(&mut self, cache: &CoreCache, drep: &[f64]) {
        let stmt_width = self.statement_width();
        let (d_statement, d_section) = drep.split_at(stmt_width);

        if let (Some(section), Some(scache)) = (&mut self.section, &cache.section) {
            section.backward(scache, d_section);
        }

        let mut dinputs = Tensor::zeros(cache.embedded.matrix.shape());
        match (&mut self.gru_bwd, &mut self.attention) {
            (Some(p_bwd), Some(p_attn)) => {
                let states = cache.attn_states.as_ref().expect("attention cache");
                let attn = cache.attn.as_ref().expect("attention cache");
                let mut dstates = Tensor::zeros(states.shape());
                global_attention_backward(
                    p_attn,
                    states,
                    &cache.embedded.mask,
                    attn,
                    d_statement,
                    &mut dstates,
                );
                let h = self.hidden_dim;
                let n = states.rows();
                let mut d_fwd = Tensor::zeros(&[n, h]);
                let mut d_bwd = Tensor::zeros(&[n, h]);
                for t in 0..n {
                    d_fwd.row_mut(t).copy_from_slice(&dstates.row(t)[..h]);
                    d_bwd.row_mut(t).copy_from_slice(&dstates.row(t)[h..]);
                }
                run_gru_backward(&mut self.gru_fwd, &cache.fwd, &d_fwd, &mut dinputs);
                let bwd_cache = cache.bwd.as_ref().expect("bidirectional cache");
                run_gru_backward(p_bwd, bwd_cache, &d_bwd, &mut dinputs);
            }
            _ => {
                let n = cache.fwd.states.rows();
                let mut dstates = Tensor::zeros(&[n, self.hidden_dim]);
                dstates.row_mut(n - 1).copy_from_slice(d_statement);
                run_gru_backward(&mut self.gru_fwd, &cache.fwd, &dstates, &mut dinputs);
            }
        }
        for pos in 0..cache.embedded.mask.len() {
            if cache.embedded.mask[pos] {
                self.word_emb
                    .add_row_grad(cache.embedded.token_ids[pos], dinputs.row(pos));
            }
        }
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        let mut slots = self.word_emb.slots();
        if let Some(section) = &self.section {
            slots.extend(section.embeddings.slots());
            slots.extend(section.gru.slots());
        }
        slots.extend(self.gru_fwd.slots());
        if let Some(bwd) = &self.gru_bwd {
            slots.extend(bwd.slots());
        }
        if let Some(attn) = &self.attention {
            slots.extend(attn.slots());
        }
        slots
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        let mut slots = self.word_emb.slots_mut();
        if let Some(section) = &mut self.section {
            slots.extend(section.embeddings.slots_mut());
            slots.extend(section.gru.slots_mut());
        }
        slots.extend(self.gru_fwd.slots_mut());
        if let Some(bwd) = &mut self.gru_bwd {
            slots.extend(bwd.slots_mut());
        }
        if let Some(attn) = &mut self.attention {
            slots.extend(attn.slots_mut());
        }
        slots
    }
}
