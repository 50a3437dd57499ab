//! The citation-need classifier variants, the training and evaluation
//! harness, checkpointing, and the citation-reason fine-tuning head.

mod checkpoint;
mod core;
mod need;
mod reason;
mod train;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::EncoderError;
use crate::numerics::NumericsError;

pub use checkpoint::{
    load_need_checkpoint, load_reason_checkpoint, save_need_checkpoint, save_reason_checkpoint,
    CHECKPOINT_VERSION,
};
pub use need::NeedModel;
pub use reason::{class_weights, fine_tune_reason, train_reason_from_scratch, ReasonModel, REASON_CLASSES};
pub use train::{
    evaluate, evaluate_reason, split_corpus, train_need, EpochStats, SplitIndices, SplitSpec,
    TrainConfig, TrainHistory, DECISION_THRESHOLD,
};

/// The four citation-need model variants: unidirectional GRU on words,
/// optionally concatenated with a section vector ("+S"), and bidirectional
/// GRU with global attention, again with or without the section vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    RnnWord,
    RnnWordSection,
    AttnWord,
    AttnWordSection,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::RnnWord,
        Variant::RnnWordSection,
        Variant::AttnWord,
        Variant::AttnWordSection,
    ];

    pub fn uses_attention(&self) -> bool {
        matches!(self, Variant::AttnWord | Variant::AttnWordSection)
    }

    pub fn uses_section(&self) -> bool {
        matches!(self, Variant::RnnWordSection | Variant::AttnWordSection)
    }

    /// Name used on the command line.
    pub fn cli_name(&self) -> &'static str {
        match self {
            Variant::RnnWord => "rnn",
            Variant::RnnWordSection => "rnn-s",
            Variant::AttnWord => "rnn-a",
            Variant::AttnWordSection => "rnn-a-s",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.iter().find(|v| v.cli_name() == s).copied()
    }

    pub(crate) fn tag(&self) -> u8 {
        match self {
            Variant::RnnWord => 0,
            Variant::RnnWordSection => 1,
            Variant::AttnWord => 2,
            Variant::AttnWordSection => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Variant> {
        Variant::ALL.iter().find(|v| v.tag() == tag).copied()
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus contains a single class")]
    SingleClass,
    #[error("statement has no usable tokens")]
    EmptyStatement,
    #[error("variant {} does not produce attention weights", .0.cli_name())]
    NoAttention(Variant),
    #[error("model is missing its {0} component")]
    MissingComponent(&'static str),
    #[error("fine-tuning requires a pretrained attention+section model, got {}", .0.cli_name())]
    WrongPretrainVariant(Variant),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version: found {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint integrity check failed")]
    ChecksumMismatch,
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint holds a {found} model, expected {expected}")]
    WrongKind {
        found: &'static str,
        expected: &'static str,
    },
    #[error("checkpoint shape mismatch: {0}")]
    ShapeMismatch(String),
}
