//! Vocabulary, pretrained word vectors, and the word/section embedding
//! tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::EncoderError;
use crate::numerics::rng::SplitMix64;
use crate::numerics::{ParamSlot, Tensor};

pub const UNK_TOKEN: &str = "<unk>";
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_INDEX: usize = 0;
pub const PAD_INDEX: usize = 1;

/// Token-to-index map with reserved unknown (0) and padding (1) entries.
/// Known tokens are indexed in first-seen order, which makes vocabularies
/// built from a deterministic corpus themselves deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build<'a>(token_stream: impl IntoIterator<Item = &'a str>) -> Vocabulary {
        let mut vocab = Vocabulary::empty();
        for token in token_stream {
            if !vocab.index.contains_key(token) {
                vocab.push(token.to_string());
            }
        }
        vocab
    }

    fn empty() -> Vocabulary {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        vocab.push(UNK_TOKEN.to_string());
        vocab.push(PAD_TOKEN.to_string());
        vocab
    }

    fn push(&mut self, token: String) {
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
    }

    /// Rebuilds a vocabulary from a stored token list (checkpoint loading).
    /// The list must start with the reserved unk/pad entries.
    pub fn from_token_list(tokens: Vec<String>) -> Result<Vocabulary, EncoderError> {
        if tokens.len() < 2 || tokens[UNK_INDEX] != UNK_TOKEN || tokens[PAD_INDEX] != PAD_TOKEN {
            return Err(EncoderError::BadVocabulary);
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(EncoderError::BadVocabulary);
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Pretrained embeddings loaded from the standard text format: one line per
/// token, `token f1 f2 ... fd`, space-separated, UTF-8.
#[derive(Debug, Clone)]
pub struct PretrainedVectors {
    dim: usize,
    map: HashMap<String, Vec<f64>>,
}

impl PretrainedVectors {
    pub fn load(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<PretrainedVectors, EncoderError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| EncoderError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::read(BufReader::new(file), expected_dim)
    }

    pub fn read(reader: impl BufRead, expected_dim: Option<usize>) -> Result<PretrainedVectors, EncoderError> {
        let mut map = HashMap::new();
        let mut dim: Option<usize> = expected_dim;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| EncoderError::BadEmbeddingLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().ok_or(EncoderError::BadEmbeddingLine {
                line: idx + 1,
                message: "empty line".to_string(),
            })?;
            let values: Result<Vec<f64>, _> = parts.map(|p| p.parse::<f64>()).collect();
            let values = values.map_err(|e| EncoderError::BadEmbeddingLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(EncoderError::BadEmbeddingLine {
                    line: idx + 1,
                    message: "no finite vector values".to_string(),
                });
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(EncoderError::EmbeddingDimMismatch {
                        expected: d,
                        found: values.len(),
                        line: idx + 1,
                    });
                }
                _ => {}
            }
            map.insert(token.to_string(), values);
        }
        let dim = dim.ok_or(EncoderError::EmptyEmbeddings)?;
        if map.is_empty() {
            return Err(EncoderError::EmptyEmbeddings);
        }
        Ok(PretrainedVectors { dim, map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.map.get(token).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Range of the seeded uniform init used for rows without a pretrained
/// vector.
pub const UNKNOWN_ROW_RANGE: f64 = 0.25;

/// Word embedding table: one row per vocabulary entry. Rows backed by a
/// pretrained vector are frozen by default; unknown-word rows (and the
/// reserved unk row) are trainable. The pad row stays zero and is masked
/// out everywhere downstream.
#[derive(Debug, Clone)]
pub struct WordEmbeddings {
    vocab: Vocabulary,
    dim: usize,
    rows: Vec<ParamSlot>,
    trainable: Vec<bool>,
}

impl WordEmbeddings {
    /// Builds the table from pretrained vectors where available, seeded
    /// random rows elsewhere.
    pub fn from_pretrained(
        vocab: Vocabulary,
        vectors: &PretrainedVectors,
        rng: &mut SplitMix64,
        freeze_pretrained: bool,
    ) -> Result<WordEmbeddings, EncoderError> {
        let dim = vectors.dim();
        let mut rows = Vec::with_capacity(vocab.len());
        let mut trainable = Vec::with_capacity(vocab.len());
        for i in 0..vocab.len() {
            let token = vocab.token(i);
            let (data, is_trainable) = if i == PAD_INDEX {
                (vec![0.0; dim], true)
            } else if let Some(v) = vectors.get(token) {
                (v.to_vec(), !freeze_pretrained)
            } else {
                (random_row(dim, rng), true)
            };
            rows.push(ParamSlot::new(
                format!("word_emb.row{i}"),
                Tensor::from_vec(&[dim], data)?,
            ));
            trainable.push(is_trainable);
        }
        Ok(WordEmbeddings {
            vocab,
            dim,
            rows,
            trainable,
        })
    }

    /// Builds a fully trainable table with every row randomly initialized
    /// (no pretrained vectors available).
    pub fn fresh(vocab: Vocabulary, dim: usize, rng: &mut SplitMix64) -> WordEmbeddings {
        let mut rows = Vec::with_capacity(vocab.len());
        let mut trainable = Vec::with_capacity(vocab.len());
        for i in 0..vocab.len() {
            let data = if i == PAD_INDEX {
                vec![0.0; dim]
            } else {
                random_row(dim, rng)
            };
            rows.push(ParamSlot::new(
                format!("word_emb.row{i}"),
                Tensor::from_vec(&[dim], data).expect("finite init"),
            ));
            trainable.push(true);
        }
        WordEmbeddings {
            vocab,
            dim,
            rows,
            trainable,
        }
    }

    /// Reassembles the table from checkpoint data.
    pub fn from_parts(
        vocab: Vocabulary,
        matrix: &Tensor,
        trainable: Vec<bool>,
    ) -> Result<WordEmbeddings, EncoderError> {
        if matrix.shape().len() != 2
            || matrix.rows() != vocab.len()
            || trainable.len() != vocab.len()
        {
            return Err(EncoderError::BadVocabulary);
        }
        let dim = matrix.cols();
        let rows = (0..vocab.len())
            .map(|i| {
                ParamSlot::new(
                    format!("word_emb.row{i}"),
                    Tensor::from_vec(&[dim], matrix.row(i).to_vec()).expect("finite checkpoint"),
                )
            })
            .collect();
        Ok(WordEmbeddings {
            vocab,
            dim,
            rows,
            trainable,
        })
    }

    /// Packs all rows into a single `[vocab x dim]` tensor (checkpointing).
    pub fn to_matrix(&self) -> Tensor {
        let mut out = Tensor::zeros(&[self.rows.len(), self.dim]);
        for (i, slot) in self.rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(slot.value.data());
        }
        out
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows[i].value.data()
    }

    pub fn trainable_mask(&self) -> &[bool] {
        &self.trainable
    }

    pub fn is_trainable(&self, i: usize) -> bool {
        self.trainable[i]
    }

    /// Accumulates a gradient into a row; frozen rows ignore it.
    pub fn add_row_grad(&mut self, i: usize, grad: &[f64]) {
        if self.trainable[i] {
            let g = self.rows[i].grad.data_mut();
            for (dst, src) in g.iter_mut().zip(grad) {
                *dst += src;
            }
        }
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        self.rows
            .iter()
            .zip(&self.trainable)
            .filter(|(_, t)| **t)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        self.rows
            .iter_mut()
            .zip(&self.trainable)
            .filter(|(_, t)| **t)
            .map(|(s, _)| s)
            .collect()
    }
}

fn random_row(dim: usize, rng: &mut SplitMix64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.uniform(-UNKNOWN_ROW_RANGE, UNKNOWN_ROW_RANGE))
        .collect()
}

/// Key used for lead-section statements in the section table.
pub const LEAD_SECTION_KEY: &str = "<lead>";
/// Reserved key for headings unseen at build time.
pub const UNK_SECTION_KEY: &str = "<unk-section>";

/// Section embedding table keyed by whole heading strings (not tokenized),
/// with a dedicated lead entry and a reserved unknown entry at index 0.
/// All rows are trainable.
#[derive(Debug, Clone)]
pub struct SectionEmbeddings {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    rows: Vec<ParamSlot>,
}

/// Canonical key for a statement's section.
pub fn section_key(heading: &str, is_lead: bool) -> String {
    if is_lead {
        LEAD_SECTION_KEY.to_string()
    } else {
        heading.to_string()
    }
}

impl SectionEmbeddings {
    pub fn build<'a>(
        section_keys: impl IntoIterator<Item = &'a str>,
        dim: usize,
        rng: &mut SplitMix64,
    ) -> SectionEmbeddings {
        let mut keys = vec![UNK_SECTION_KEY.to_string()];
        let mut index = HashMap::new();
        index.insert(UNK_SECTION_KEY.to_string(), 0);
        for key in section_keys {
            if !index.contains_key(key) {
                index.insert(key.to_string(), keys.len());
                keys.push(key.to_string());
            }
        }
        let rows = (0..keys.len())
            .map(|i| {
                ParamSlot::new(
                    format!("section_emb.row{i}"),
                    Tensor::from_vec(&[dim], random_row(dim, rng)).expect("finite init"),
                )
            })
            .collect();
        SectionEmbeddings {
            keys,
            index,
            dim,
            rows,
        }
    }

    pub fn from_parts(keys: Vec<String>, matrix: &Tensor) -> Result<SectionEmbeddings, EncoderError> {
        if keys.is_empty()
            || keys[0] != UNK_SECTION_KEY
            || matrix.shape().len() != 2
            || matrix.rows() != keys.len()
        {
            return Err(EncoderError::BadVocabulary);
        }
        let dim = matrix.cols();
        let mut index = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(EncoderError::BadVocabulary);
            }
        }
        let rows = (0..keys.len())
            .map(|i| {
                ParamSlot::new(
                    format!("section_emb.row{i}"),
                    Tensor::from_vec(&[dim], matrix.row(i).to_vec()).expect("finite checkpoint"),
                )
            })
            .collect();
        Ok(SectionEmbeddings {
            keys,
            index,
            dim,
            rows,
        })
    }

    pub fn to_matrix(&self) -> Tensor {
        let mut out = Tensor::zeros(&[self.rows.len(), self.dim]);
        for (i, slot) in self.rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(slot.value.data());
        }
        out
    }

    pub fn lookup(&self, heading: &str, is_lead: bool) -> usize {
        let key = section_key(heading, is_lead);
        self.index.get(&key).copied().unwrap_or(0)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows[i].value.data()
    }

    pub fn add_row_grad(&mut self, i: usize, grad: &[f64]) {
        let g = self.rows[i].grad.data_mut();
        for (dst, src) in g.iter_mut().zip(grad) {
            *dst += src;
        }
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        self.rows.iter().collect()
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        self.rows.iter_mut().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn vocabulary_reserves_unk_and_pad() {
        let vocab = Vocabulary::build(["alpha", "beta", "alpha"]);
        assert_eq!(vocab.lookup(UNK_TOKEN), UNK_INDEX);
        assert_eq!(vocab.lookup(PAD_TOKEN), PAD_INDEX);
        assert_eq!(vocab.lookup("alpha"), 2);
        assert_eq!(vocab.lookup("beta"), 3);
        assert_eq!(vocab.lookup("missing"), UNK_INDEX);
        assert_eq!(vocab.len(), 4);
    }

    #[test]
    fn vocabulary_round_trips_through_token_list() {
        let vocab = Vocabulary::build(["x", "y"]);
        let back = Vocabulary::from_token_list(vocab.tokens().to_vec()).unwrap();
        assert_eq!(vocab, back);
        assert!(Vocabulary::from_token_list(vec!["bad".into()]).is_err());
    }

    #[test]
    fn pretrained_loader_parses_text_format() {
        let text = "the 0.1 0.2 0.3\nof 0.4 0.5 0.6\n";
        let vectors = PretrainedVectors::read(Cursor::new(text), None).unwrap();
        assert_eq!(vectors.dim(), 3);
        assert_eq!(vectors.get("the").unwrap(), &[0.1, 0.2, 0.3]);
        assert!(vectors.get("cat").is_none());
    }

    #[test]
    fn pretrained_loader_validates_dimension() {
        let text = "the 0.1 0.2\nof 0.4 0.5 0.6\n";
        assert!(matches!(
            PretrainedVectors::read(Cursor::new(text), None),
            Err(EncoderError::EmbeddingDimMismatch { .. })
        ));
        let ok = "the 0.1 0.2\n";
        assert!(matches!(
            PretrainedVectors::read(Cursor::new(ok), Some(3)),
            Err(EncoderError::EmbeddingDimMismatch { .. })
        ));
        assert!(matches!(
            PretrainedVectors::read(Cursor::new(""), None),
            Err(EncoderError::EmptyEmbeddings)
        ));
    }

    #[test]
    fn unknown_rows_are_seeded_and_trainable_pretrained_frozen() {
        let vocab = Vocabulary::build(["known", "unknownword"]);
        let vectors =
            PretrainedVectors::read(Cursor::new("known 1.0 2.0"), None).unwrap();
        let mut rng = SplitMix64::new(3);
        let emb = WordEmbeddings::from_pretrained(vocab, &vectors, &mut rng, true).unwrap();
        assert_eq!(emb.row(2), &[1.0, 2.0]);
        assert!(!emb.is_trainable(2));
        assert!(emb.is_trainable(UNK_INDEX));
        assert!(emb.is_trainable(3));
        let unk_row = emb.row(3);
        assert!(unk_row.iter().all(|v| v.abs() <= UNKNOWN_ROW_RANGE));
        // Same seed, same rows.
        let vocab2 = Vocabulary::build(["known", "unknownword"]);
        let mut rng2 = SplitMix64::new(3);
        let emb2 = WordEmbeddings::from_pretrained(vocab2, &vectors, &mut rng2, true).unwrap();
        assert_eq!(emb.row(3), emb2.row(3));
    }

    #[test]
    fn frozen_rows_reject_gradients() {
        let vocab = Vocabulary::build(["known"]);
        let vectors = PretrainedVectors::read(Cursor::new("known 1.0 2.0"), None).unwrap();
        let mut rng = SplitMix64::new(3);
        let mut emb = WordEmbeddings::from_pretrained(vocab, &vectors, &mut rng, true).unwrap();
        emb.add_row_grad(2, &[5.0, 5.0]);
        assert_eq!(emb.slots().len(), 2); // unk + pad only
        emb.add_row_grad(UNK_INDEX, &[1.0, 1.0]);
        assert_eq!(emb.slots()[0].grad.data(), &[1.0, 1.0]);
    }

    #[test]
    fn section_table_has_unk_and_lead_entries() {
        let mut rng = SplitMix64::new(1);
        let table = SectionEmbeddings::build(
            [LEAD_SECTION_KEY, "History", "Legacy"],
            4,
            &mut rng,
        );
        assert_eq!(table.len(), 4);
        assert_eq!(table.lookup("History", false), 2);
        assert_eq!(table.lookup("whatever", true), 1); // lead wins
        assert_eq!(table.lookup("Unseen", false), 0); // unk
    }
}
