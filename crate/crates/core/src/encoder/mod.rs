//! Statement representation and sequence encoding: word and section
//! embeddings, the GRU cell, bidirectional runs, and global attention.

mod attention;
mod gru;
mod vocab;

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Statement;
use crate::numerics::{NumericsError, Tensor};

pub use attention::{AttentionParams, global_attention};
pub(crate) use attention::{global_attention_backward, global_attention_cached, AttentionCache};
pub use gru::{bidirectional_encode, gru_cell_step, run_gru, GruParams, RunDirection};
pub(crate) use gru::{
    bidirectional_encode_cached, concat_states, glorot, gru_cell_forward, gru_cell_backward,
    run_gru_backward, run_gru_cached, GruRunCache, GruStepCache,
};
pub use vocab::{
    section_key, PretrainedVectors, SectionEmbeddings, Vocabulary, WordEmbeddings,
    LEAD_SECTION_KEY, PAD_INDEX, PAD_TOKEN, UNKNOWN_ROW_RANGE, UNK_INDEX, UNK_SECTION_KEY,
    UNK_TOKEN,
};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("max_len must be positive")]
    ZeroMaxLen,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("non-finite input to {0}")]
    NonFiniteInput(&'static str),
    #[error("embedding file line {line}: {message}")]
    BadEmbeddingLine { line: usize, message: String },
    #[error("embedding dimension mismatch: expected {expected}, found {found} at line {line}")]
    EmbeddingDimMismatch {
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("embedding file contains no vectors")]
    EmptyEmbeddings,
    #[error("invalid vocabulary or section table")]
    BadVocabulary,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A statement turned into an embedding matrix: `[max_len x dim]`, with a
/// validity mask and per-position vocabulary ids. Sequences longer than
/// `max_len` lose their tail; shorter ones are padded with the (zero,
/// masked-out) pad row.
#[derive(Debug, Clone)]
pub struct EmbeddedStatement {
    pub matrix: Tensor,
    pub mask: Vec<bool>,
    pub token_ids: Vec<usize>,
    pub n_tokens: usize,
}

pub fn embed_tokens(
    tokens: &[String],
    embeddings: &WordEmbeddings,
    max_len: usize,
) -> Result<EmbeddedStatement, EncoderError> {
    if max_len == 0 {
        return Err(EncoderError::ZeroMaxLen);
    }
    let dim = embeddings.dim();
    let n_tokens = tokens.len().min(max_len);
    let mut matrix = Tensor::zeros(&[max_len, dim]);
    let mut mask = vec![false; max_len];
    let mut token_ids = vec![PAD_INDEX; max_len];
    for (pos, token) in tokens.iter().take(max_len).enumerate() {
        let id = embeddings.vocab().lookup(token);
        matrix.row_mut(pos).copy_from_slice(embeddings.row(id));
        mask[pos] = true;
        token_ids[pos] = id;
    }
    Ok(EmbeddedStatement {
        matrix,
        mask,
        token_ids,
        n_tokens,
    })
}

/// Section lookup plus a length-1 GRU over the section embedding row.
#[derive(Debug, Clone)]
pub struct SectionEncoder {
    pub embeddings: SectionEmbeddings,
    pub gru: GruParams,
}

#[derive(Debug, Clone)]
pub(crate) struct SectionCache {
    pub row_index: usize,
    pub step: GruStepCache,
}

impl SectionEncoder {
    pub(crate) fn encode_cached(
        &self,
        heading: &str,
        is_lead: bool,
    ) -> Result<SectionCache, EncoderError> {
        let row_index = self.embeddings.lookup(heading, is_lead);
        let h0 = vec![0.0; self.gru.hidden_dim()];
        let step = gru_cell_forward(self.embeddings.row(row_index), &h0, &self.gru)?;
        Ok(SectionCache { row_index, step })
    }

    pub(crate) fn backward(&mut self, cache: &SectionCache, dh: &[f64]) {
        let mut dh_prev = vec![0.0; self.gru.hidden_dim()];
        let mut dinput = vec![0.0; self.gru.input_dim()];
        gru_cell_backward(&mut self.gru, &cache.step, dh, &mut dh_prev, &mut dinput);
        self.embeddings.add_row_grad(cache.row_index, &dinput);
    }
}

/// Encodes a section heading: embedding-row lookup (whole string key, lead
/// statements use the dedicated lead entry, unseen headings the unknown
/// entry) followed by a single GRU step from a zero state.
pub fn encode_section(
    heading: &str,
    is_lead: bool,
    encoder: &SectionEncoder,
) -> Result<Vec<f64>, EncoderError> {
    Ok(encoder.encode_cached(heading, is_lead)?.step.h)
}

/// A fully encoded statement as the models consume it.
#[derive(Debug, Clone)]
pub struct EncodedStatement {
    /// Hidden states in input order, `[max_len x h_enc]`.
    pub states: Tensor,
    pub mask: Vec<bool>,
    /// Attention weights over the states (attention encoders only).
    pub attention: Option<Vec<f64>>,
    /// Attention-weighted context vector (attention encoders only).
    pub context: Option<Vec<f64>>,
    /// Encoded section vector (section-aware encoders only).
    pub section: Option<Vec<f64>>,
}

/// Convenience forward pass used by explanation tooling and tests: embeds
/// the statement, runs the statement encoder (unidirectional, or
/// bidirectional plus attention), and optionally the section encoder.
#[allow(clippy::too_many_arguments)]
pub fn encode_statement(
    statement: &Statement,
    embeddings: &WordEmbeddings,
    max_len: usize,
    gru_fwd: &GruParams,
    gru_bwd: Option<&GruParams>,
    attention: Option<&AttentionParams>,
    section: Option<&SectionEncoder>,
) -> Result<EncodedStatement, EncoderError> {
    let embedded = embed_tokens(&statement.tokens, embeddings, max_len)?;
    let states = match gru_bwd {
        Some(bwd) => bidirectional_encode(&embedded.matrix, &embedded.mask, gru_fwd, bwd)?,
        None => run_gru(
            &embedded.matrix,
            &embedded.mask,
            gru_fwd,
            RunDirection::Forward,
        )?,
    };
    let (attention_weights, context) = match attention {
        Some(params) => {
            let (w, c) = global_attention(&states, &embedded.mask, params)?;
            (Some(w), Some(c))
        }
        None => (None, None),
    };
    let section_vec = match section {
        Some(enc) => Some(encode_section(
            &statement.section_heading,
            statement.is_lead,
            enc,
        )?),
        None => None,
    };
    Ok(EncodedStatement {
        states,
        mask: embedded.mask,
        attention: attention_weights,
        context,
        section: section_vec,
    })
}
