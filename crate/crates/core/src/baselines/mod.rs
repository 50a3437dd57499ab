//! Feature-based baselines: verb-lexicon counts, coarse POS frequencies,
//! averaged word vectors, and a from-scratch random forest classifier.

mod features;
mod forest;
mod lexicon;
mod postag;

use std::path::PathBuf;

use thiserror::Error;

pub use features::{export_features_csv, FeatureConfig, FeatureExtractor, FeatureVector};
pub use forest::{
    build_forest, gini, predict_class, predict_forest, train_forest, DecisionTree, ForestParams,
    ForestTuneReport, RandomForest,
};
pub use lexicon::{shipped_lexicons, stem, LexiconCategory, VerbLexicon};
pub use postag::{pos_tag, PosTag};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("{0} lexicon is empty")]
    EmptyLexicon(&'static str),
    #[error("word-vector features require pretrained vectors")]
    MissingVectors,
    #[error("cannot compute impurity of an empty node")]
    EmptyNode,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
