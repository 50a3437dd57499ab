//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "CNCK" | version u32 | kind u8 (0 need, 1 reason) | variant u8
//! embed_dim u32 | hidden_dim u32 | max_len u32 | freeze_pretrained u8
//! tensor_count u32
//!   per tensor: name (u16 len + utf8) | rank u8 | dims u32* | data f64*
//! vocab: count u32 | tokens (u32 len + utf8)* | trainable u8*
//! sections: count u32 | keys (u32 len + utf8)*
//! reason class weights: count u32 | f64*        (need models write 0)
//! config snapshot: u32 len + json bytes
//! sha256 of everything above (32 bytes)
//! ```
//!
//! Loading verifies magic, version, checksum, and every tensor's name and
//! shape, and reproduces bit-identical forward outputs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoder::{
    AttentionParams, GruParams, SectionEmbeddings, SectionEncoder, Vocabulary, WordEmbeddings,
};
use crate::numerics::rng::SplitMix64;
use crate::numerics::Tensor;

use super::core::{DenseLayer, EncoderCore};
use super::need::NeedModel;
use super::reason::{ReasonModel, REASON_CLASSES};
use super::{CheckpointError, ModelError, Variant};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"CNCK";

const KIND_NEED: u8 = 0;
const KIND_REASON: u8 = 1;

fn kind_name(kind: u8) -> &'static str {
    match kind {
        KIND_NEED => "need",
        KIND_REASON => "reason",
        _ => "unknown",
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigSnapshot {
    kind: String,
    variant: String,
    embed_dim: usize,
    hidden_dim: usize,
    max_len: usize,
    freeze_pretrained: bool,
    seed: u64,
}

// ---------------------------------------------------------------- writing

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Writer {
        Writer { buf: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn short_str(&mut self, s: &str) {
        self.u16(s.len() as u16);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn long_str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn tensor(&mut self, name: &str, t: &Tensor) {
        self.short_str(name);
        self.u8(t.shape().len() as u8);
        for &d in t.shape() {
            self.u32(d as u32);
        }
        for &v in t.data() {
            self.f64(v);
        }
    }
}

fn gru_tensors<'a>(prefix: &str, p: &'a GruParams) -> Vec<(String, &'a Tensor)> {
    p.slots()
        .into_iter()
        .map(|s| {
            let field = s.name.rsplit('.').next().unwrap();
            (format!("{prefix}.{field}"), &s.value)
        })
        .collect()
}

fn serialize_model(
    kind: u8,
    variant: Variant,
    core: &EncoderCore,
    dense: &DenseLayer,
    class_weights: &[f64],
    freeze_pretrained: bool,
    seed: u64,
) -> Vec<u8> {
    let mut w = Writer::new();
    w.buf.extend_from_slice(MAGIC);
    w.u32(CHECKPOINT_VERSION);
    w.u8(kind);
    w.u8(variant.tag());
    w.u32(core.word_emb.dim() as u32);
    w.u32(core.hidden_dim as u32);
    w.u32(core.max_len as u32);
    w.u8(freeze_pretrained as u8);

    let word_matrix = core.word_emb.to_matrix();
    let mut tensors: Vec<(String, Tensor)> =
        vec![("word_embeddings".to_string(), word_matrix)];
    if let Some(section) = &core.section {
        tensors.push(("section_embeddings".to_string(), section.embeddings.to_matrix()));
        for (name, t) in gru_tensors("section_gru", &section.gru) {
            tensors.push((name, t.clone()));
        }
    }
    for (name, t) in gru_tensors("gru_fwd", &core.gru_fwd) {
        tensors.push((name, t.clone()));
    }
    if let Some(bwd) = &core.gru_bwd {
        for (name, t) in gru_tensors("gru_bwd", bwd) {
            tensors.push((name, t.clone()));
        }
    }
    if let Some(attn) = &core.attention {
        tensors.push(("attention.proj".to_string(), attn.proj.value.clone()));
        tensors.push(("attention.score".to_string(), attn.score.value.clone()));
    }
    tensors.push(("dense.weight".to_string(), dense.weight.value.clone()));
    tensors.push(("dense.bias".to_string(), dense.bias.value.clone()));

    w.u32(tensors.len() as u32);
    for (name, t) in &tensors {
        w.tensor(name, t);
    }

    let vocab = core.word_emb.vocab();
    w.u32(vocab.len() as u32);
    for token in vocab.tokens() {
        w.long_str(token);
    }
    for &t in core.word_emb.trainable_mask() {
        w.u8(t as u8);
    }

    match &core.section {
        Some(section) => {
            let keys = section.embeddings.keys();
            w.u32(keys.len() as u32);
            for key in keys {
                w.long_str(key);
            }
        }
        None => w.u32(0),
    }

    w.u32(class_weights.len() as u32);
    for &cw in class_weights {
        w.f64(cw);
    }

    let snapshot = ConfigSnapshot {
        kind: kind_name(kind).to_string(),
        variant: variant.cli_name().to_string(),
        embed_dim: core.word_emb.dim(),
        hidden_dim: core.hidden_dim,
        max_len: core.max_len,
        freeze_pretrained,
        seed,
    };
    w.long_str(&serde_json::to_string(&snapshot).expect("snapshot serializes"));

    let digest = Sha256::digest(&w.buf);
    w.buf.extend_from_slice(&digest);
    w.buf
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CheckpointError> {
    fs::write(path, bytes).map_err(|e| CheckpointError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn save_need_checkpoint(model: &NeedModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let bytes = serialize_model(
        KIND_NEED,
        model.variant,
        &model.core,
        &model.dense,
        &[],
        model.freeze_pretrained,
        model.seed,
    );
    write_file(path.as_ref(), &bytes).map_err(ModelError::from)
}

pub fn save_reason_checkpoint(model: &ReasonModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let bytes = serialize_model(
        KIND_REASON,
        Variant::AttnWordSection,
        &model.core,
        &model.dense,
        &model.class_weights[..],
        model.freeze_pretrained,
        model.seed,
    );
    write_file(path.as_ref(), &bytes).map_err(ModelError::from)
}

// ---------------------------------------------------------------- reading

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Corrupt("unexpected end of file".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn short_str(&mut self) -> Result<String, CheckpointError> {
        let len = self.u16()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| CheckpointError::Corrupt("invalid utf-8".into()))
    }

    fn long_str(&mut self) -> Result<String, CheckpointError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| CheckpointError::Corrupt("invalid utf-8".into()))
    }

    fn tensor(&mut self) -> Result<(String, Tensor), CheckpointError> {
        let name = self.short_str()?;
        let rank = self.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(self.u32()? as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(self.f64()?);
        }
        let tensor = Tensor::from_vec(&shape, data)
            .map_err(|e| CheckpointError::Corrupt(format!("tensor {name}: {e}")))?;
        Ok((name, tensor))
    }
}

struct LoadedContainer {
    kind: u8,
    variant: Variant,
    hidden_dim: usize,
    max_len: usize,
    freeze_pretrained: bool,
    seed: u64,
    tensors: std::collections::HashMap<String, Tensor>,
    vocab: Vocabulary,
    trainable: Vec<bool>,
    section_keys: Vec<String>,
    class_weights: Vec<f64>,
}

fn read_container(path: &Path) -> Result<LoadedContainer, CheckpointError> {
    let bytes = fs::read(path).map_err(|e| CheckpointError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    if bytes.len() < MAGIC.len() + 36 {
        return Err(CheckpointError::Corrupt("file too short".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != trailer {
        return Err(CheckpointError::ChecksumMismatch);
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let kind = r.u8()?;
    let variant = Variant::from_tag(r.u8()?)
        .ok_or_else(|| CheckpointError::Corrupt("unknown variant tag".into()))?;
    let _embed_dim = r.u32()? as usize;
    let hidden_dim = r.u32()? as usize;
    let max_len = r.u32()? as usize;
    let freeze_pretrained = r.u8()? != 0;

    let tensor_count = r.u32()? as usize;
    let mut tensors = std::collections::HashMap::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let (name, t) = r.tensor()?;
        tensors.insert(name, t);
    }

    let vocab_len = r.u32()? as usize;
    let mut tokens = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        tokens.push(r.long_str()?);
    }
    let vocab = Vocabulary::from_token_list(tokens)
        .map_err(|_| CheckpointError::Corrupt("invalid vocabulary".into()))?;
    let mut trainable = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        trainable.push(r.u8()? != 0);
    }

    let section_count = r.u32()? as usize;
    let mut section_keys = Vec::with_capacity(section_count);
    for _ in 0..section_count {
        section_keys.push(r.long_str()?);
    }

    let cw_count = r.u32()? as usize;
    let mut class_weights = Vec::with_capacity(cw_count);
    for _ in 0..cw_count {
        class_weights.push(r.f64()?);
    }

    let snapshot_json = r.long_str()?;
    let snapshot: ConfigSnapshot = serde_json::from_str(&snapshot_json)
        .map_err(|e| CheckpointError::Corrupt(format!("config snapshot: {e}")))?;
    if r.pos != body.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }

    Ok(LoadedContainer {
        kind,
        variant,
        hidden_dim,
        max_len,
        freeze_pretrained,
        seed: snapshot.seed,
        tensors,
        vocab,
        trainable,
        section_keys,
        class_weights,
    })
}

fn take_tensor(
    c: &mut LoadedContainer,
    name: &str,
    shape: &[usize],
) -> Result<Tensor, CheckpointError> {
    let t = c
        .tensors
        .remove(name)
        .ok_or_else(|| CheckpointError::ShapeMismatch(format!("missing tensor {name}")))?;
    if t.shape() != shape {
        return Err(CheckpointError::ShapeMismatch(format!(
            "tensor {name} has shape {:?}, expected {:?}",
            t.shape(),
            shape
        )));
    }
    Ok(t)
}

fn load_gru(
    c: &mut LoadedContainer,
    prefix: &str,
    input_dim: usize,
    hidden_dim: usize,
) -> Result<GruParams, CheckpointError> {
    let mut p = GruParams::zeros(prefix, input_dim, hidden_dim);
    for slot in p.slots_mut() {
        let field = slot.name.rsplit('.').next().unwrap().to_string();
        let t = take_tensor(c, &format!("{prefix}.{field}"), slot.value.shape())?;
        slot.value = t;
    }
    Ok(p)
}

fn load_core(c: &mut LoadedContainer) -> Result<EncoderCore, CheckpointError> {
    let vocab_len = c.vocab.len();
    let word_matrix = take_tensor(c, "word_embeddings", &[vocab_len, word_dim(c)?])?;
    let word_emb = WordEmbeddings::from_parts(c.vocab.clone(), &word_matrix, c.trainable.clone())
        .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let embed_dim = word_emb.dim();
    let hidden = c.hidden_dim;

    let section = if c.variant.uses_section() {
        if c.section_keys.is_empty() {
            return Err(CheckpointError::Corrupt("missing section table".into()));
        }
        let matrix = take_tensor(c, "section_embeddings", &[c.section_keys.len(), embed_dim])?;
        let embeddings = SectionEmbeddings::from_parts(c.section_keys.clone(), &matrix)
            .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let gru = load_gru(c, "section_gru", embed_dim, hidden)?;
        Some(SectionEncoder { embeddings, gru })
    } else {
        None
    };

    let gru_fwd = load_gru(c, "gru_fwd", embed_dim, hidden)?;
    let (gru_bwd, attention) = if c.variant.uses_attention() {
        let bwd = load_gru(c, "gru_bwd", embed_dim, hidden)?;
        let mut attn = AttentionParams::init("attention", 2 * hidden, &mut SplitMix64::new(0));
        attn.proj.value = take_tensor(c, "attention.proj", &[2 * hidden, 2 * hidden])?;
        attn.score.value = take_tensor(c, "attention.score", &[2 * hidden])?;
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
        hidden_dim: hidden,
        max_len: c.max_len,
    })
}

fn word_dim(c: &LoadedContainer) -> Result<usize, CheckpointError> {
    let t = c
        .tensors
        .get("word_embeddings")
        .ok_or_else(|| CheckpointError::ShapeMismatch("missing word_embeddings".into()))?;
    if t.shape().len() != 2 || t.rows() != c.vocab.len() {
        return Err(CheckpointError::ShapeMismatch(format!(
            "word_embeddings shape {:?} does not match vocab of {}",
            t.shape(),
            c.vocab.len()
        )));
    }
    Ok(t.cols())
}

pub fn load_need_checkpoint(path: impl AsRef<Path>) -> Result<NeedModel, ModelError> {
    let mut c = read_container(path.as_ref())?;
    if c.kind != KIND_NEED {
        return Err(CheckpointError::WrongKind {
            found: kind_name(c.kind),
            expected: "need",
        }
        .into());
    }
    let core = load_core(&mut c)?;
    let rep = core.rep_width();
    let weight = take_tensor(&mut c, "dense.weight", &[1, rep])?;
    let bias = take_tensor(&mut c, "dense.bias", &[1])?;
    NeedModel::from_parts(
        c.variant,
        core,
        DenseLayer::from_tensors(weight, bias),
        c.freeze_pretrained,
        c.seed,
    )
}

pub fn load_reason_checkpoint(path: impl AsRef<Path>) -> Result<ReasonModel, ModelError> {
    let mut c = read_container(path.as_ref())?;
    if c.kind != KIND_REASON {
        return Err(CheckpointError::WrongKind {
            found: kind_name(c.kind),
            expected: "reason",
        }
        .into());
    }
    if c.class_weights.len() != REASON_CLASSES {
        return Err(CheckpointError::Corrupt("missing class weights".into()).into());
    }
    let core = load_core(&mut c)?;
    let rep = core.rep_width();
    let weight = take_tensor(&mut c, "dense.weight", &[REASON_CLASSES, rep])?;
    let bias = take_tensor(&mut c, "dense.bias", &[REASON_CLASSES])?;
    let mut class_weights = [0.0; REASON_CLASSES];
    class_weights.copy_from_slice(&c.class_weights);
    ReasonModel::from_parts(
        core,
        DenseLayer::from_tensors(weight, bias),
        class_weights,
        c.freeze_pretrained,
        c.seed,
    )
}
