//! Feature extraction for the dictionary and word-vector baselines.
//!
//! Column layout (fixed given a configuration, names via
//! [`FeatureExtractor::names`]):
//! - one count column per (category, lemma), categories in fixed order and
//!   lemmas sorted, so lexicon file order is irrelevant;
//! - 12 POS-tag frequency columns, normalized by sentence length;
//! - the section indicator (1 if the statement sits in the lead);
//! - the mean pretrained vector over known tokens (zeros if none known).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::corpus::Statement;
use crate::encoder::PretrainedVectors;

use super::lexicon::{stem, VerbLexicon};
use super::postag::{pos_tag, PosTag};
use super::BaselineError;

/// Which feature groups to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    pub dictionary_counts: bool,
    pub pos_frequencies: bool,
    pub section_indicator: bool,
    pub word_vectors: bool,
}

impl FeatureConfig {
    /// The dictionary baseline: lexicon counts + POS style + section.
    pub fn dictionary() -> FeatureConfig {
        FeatureConfig {
            dictionary_counts: true,
            pos_frequencies: true,
            section_indicator: true,
            word_vectors: false,
        }
    }

    /// The word-vector baseline: averaged embeddings only.
    pub fn word_vector() -> FeatureConfig {
        FeatureConfig {
            dictionary_counts: false,
            pos_frequencies: false,
            section_indicator: false,
            word_vectors: true,
        }
    }

    /// Dictionary-term counts plus the section indicator (the correlation
    /// analysis uses exactly these columns).
    pub fn correlation() -> FeatureConfig {
        FeatureConfig {
            dictionary_counts: true,
            pos_frequencies: false,
            section_indicator: true,
            word_vectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Stateless extractor with a fixed column layout.
pub struct FeatureExtractor<'a> {
    lexicons: Vec<VerbLexicon>,
    vectors: Option<&'a PretrainedVectors>,
    config: FeatureConfig,
    names: Vec<String>,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        mut lexicons: Vec<VerbLexicon>,
        vectors: Option<&'a PretrainedVectors>,
        config: FeatureConfig,
    ) -> Result<FeatureExtractor<'a>, BaselineError> {
        if config.word_vectors && vectors.is_none() {
            return Err(BaselineError::MissingVectors);
        }
        lexicons.sort_by_key(|l| l.category);
        let mut names = Vec::new();
        if config.dictionary_counts {
            for lex in &lexicons {
                for lemma in lex.lemmas() {
                    names.push(format!("{}:{}", lex.category.as_str(), lemma));
                }
            }
        }
        if config.pos_frequencies {
            for tag in PosTag::ALL {
                names.push(format!("pos:{}", tag.as_str()));
            }
        }
        if config.section_indicator {
            names.push("section".to_string());
        }
        if config.word_vectors {
            let dim = vectors.unwrap().dim();
            for i in 0..dim {
                names.push(format!("wv:{i:03}"));
            }
        }
        Ok(FeatureExtractor {
            lexicons,
            vectors,
            config,
            names,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn extract(&self, statement: &Statement) -> FeatureVector {
        let mut values = Vec::with_capacity(self.names.len());
        let tokens = &statement.tokens;
        if self.config.dictionary_counts {
            let stems: Vec<String> = tokens.iter().map(|t| stem(t)).collect();
            for lex in &self.lexicons {
                for lemma in lex.lemmas() {
                    let count = tokens
                        .iter()
                        .zip(&stems)
                        .filter(|(tok, st)| tok.as_str() == lemma || st.as_str() == lemma)
                        .count();
                    values.push(count as f64);
                }
            }
        }
        if self.config.pos_frequencies {
            let tags = pos_tag(tokens);
            let mut counts = [0usize; 12];
            for tag in &tags {
                counts[tag.index()] += 1;
            }
            let denom = tokens.len().max(1) as f64;
            for c in counts {
                values.push(c as f64 / denom);
            }
        }
        if self.config.section_indicator {
            values.push(if statement.is_lead { 1.0 } else { 0.0 });
        }
        if self.config.word_vectors {
            let vectors = self.vectors.unwrap();
            let mut sum = vec![0.0; vectors.dim()];
            let mut known = 0usize;
            for token in tokens {
                if let Some(v) = vectors.get(token) {
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += x;
                    }
                    known += 1;
                }
            }
            if known > 0 {
                for s in sum.iter_mut() {
                    *s /= known as f64;
                }
            }
            values.extend(sum);
        }
        FeatureVector { values }
    }
}

/// CSV export: header names every feature column, one instance per row,
/// with the label in the last column.
pub fn export_features_csv(
    extractor: &FeatureExtractor,
    rows: &[(&Statement, &str)],
    path: impl AsRef<Path>,
) -> Result<(), BaselineError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| BaselineError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    let mut writeln = |line: &str| -> Result<(), BaselineError> {
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| BaselineError::Io {
                path: path.to_path_buf(),
                source: e,
            })
    };
    writeln(&format!("{},label", extractor.names().join(",")))?;
    for (statement, label) in rows {
        let features = extractor.extract(statement);
        let cells: Vec<String> = features.values.iter().map(|v| format!("{v}")).collect();
        writeln(&format!("{},{}", cells.join(","), label))?;
    }
    w.flush().map_err(|e| BaselineError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
