//! Corpus construction: wiki-style markup parsing, sentence extraction with
//! citation metadata, and the FA / LQN / RND labeled dataset builders.

mod dataset;
mod io;
mod markup;
mod segment;
mod tokenize;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    build_fa_dataset, build_lqn_dataset, build_rnd_dataset, validate_dataset, DEFAULT_RND_TOTAL,
};
pub use io::{
    read_corpus, read_reason_corpus, write_corpus, write_reason_corpus, CORPUS_SCHEMA_VERSION,
};
pub use markup::{parse_article, parse_article_verbose, render_article, ParseWarning};
pub use segment::{segment_sentences, ABBREVIATIONS};
pub use tokenize::tokenize;

/// Sentences shorter than this many tokens are discarded at parse time;
/// they are almost always markup debris rather than prose.
pub const MIN_SENTENCE_TOKENS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityClass {
    Featured,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// Which of the three dataset construction rules produced an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    #[serde(rename = "FA")]
    Fa,
    #[serde(rename = "LQN")]
    Lqn,
    #[serde(rename = "RND")]
    Rnd,
}

impl DatasetId {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetId::Fa => "FA",
            DatasetId::Lqn => "LQN",
            DatasetId::Rnd => "RND",
        }
    }

    pub fn parse(s: &str) -> Option<DatasetId> {
        match s.to_ascii_uppercase().as_str() {
            "FA" => Some(DatasetId::Fa),
            "LQN" => Some(DatasetId::Lqn),
            "RND" => Some(DatasetId::Rnd),
            _ => None,
        }
    }
}

/// The eight reasons a sentence can need a citation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reason {
    Quotation,
    Statistics,
    Controversial,
    Opinion,
    Life,
    Scientific,
    Historical,
    Other,
}

impl Reason {
    pub const ALL: [Reason; 8] = [
        Reason::Quotation,
        Reason::Statistics,
        Reason::Controversial,
        Reason::Opinion,
        Reason::Life,
        Reason::Scientific,
        Reason::Historical,
        Reason::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::Quotation => "quotation",
            Reason::Statistics => "statistics",
            Reason::Controversial => "controversial",
            Reason::Opinion => "opinion",
            Reason::Life => "life",
            Reason::Scientific => "scientific",
            Reason::Historical => "historical",
            Reason::Other => "other",
        }
    }

    pub fn index(&self) -> usize {
        Reason::ALL.iter().position(|r| r == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Reason> {
        Reason::ALL.get(i).copied()
    }

    pub fn parse(s: &str) -> Option<Reason> {
        Reason::ALL.iter().find(|r| r.as_str() == s).copied()
    }
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One extracted sentence with its article/section context and citation
/// flags. This is the unit everything downstream classifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub article_id: String,
    pub section_heading: String,
    pub is_lead: bool,
    pub text: String,
    pub tokens: Vec<String>,
    pub has_inline_citation: bool,
    pub has_citation_needed_tag: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub statements: Vec<Statement>,
    pub has_any_citation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    /// Empty heading marks the lead section.
    pub heading: String,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub article_id: String,
    pub title: String,
    pub quality_class: QualityClass,
    /// The first section is always the lead (possibly with no paragraphs).
    pub sections: Vec<Section>,
}

impl RawArticle {
    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.sections
            .iter()
            .flat_map(|s| s.paragraphs.iter())
            .flat_map(|p| p.statements.iter())
    }
}

/// A statement with its binary citation-need label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub statement: Statement,
    pub label: Label,
    pub dataset: DatasetId,
}

/// A statement labeled with one of the eight citation reasons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasonInstance {
    pub statement: Statement,
    pub reason: Reason,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty article")]
    EmptyArticle,
    #[error("article {article_id} is not a featured article")]
    NotFeatured { article_id: String },
    #[error("insufficient eligible {class} statements: requested {requested}, available {available}")]
    Insufficient {
        class: &'static str,
        requested: usize,
        available: usize,
    },
    #[error("n_total must be even, got {0}")]
    OddTotal(usize),
    #[error("unsupported corpus schema version: found {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("malformed corpus line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
