//! citeneed: a toolkit for deciding whether a sentence needs a citation and
//! why.
//!
//! The crate covers the full pipeline:
//!
//! - [`corpus`] parses wiki-style markup into sentences with citation flags
//!   and builds labeled datasets from them;
//! - [`numerics`] is a small deterministic f64 kernel (tensors, Adam,
//!   gradient checking) that everything else is built on;
//! - [`encoder`] holds word/section embeddings, the GRU cell, and global
//!   attention, all with hand-derived backward passes;
//! - [`models`] assembles the four citation-need classifier variants, the
//!   training loop, checkpointing, and the 8-class citation-reason head;
//! - [`baselines`] provides the verb-lexicon / POS / word-vector features
//!   and a from-scratch random forest;
//! - [`analysis`] computes evaluation metrics, point-biserial correlations,
//!   k-means clustering with elbow selection, and attention reports;
//! - [`cli`] wires everything into the `citeneed` binary.
//!
//! Every run is reproducible: all randomness flows from explicit seeds
//! through [`numerics::rng::SplitMix64`].

pub mod analysis;
pub mod baselines;
pub mod benchmark;
pub mod cli;
pub mod corpus;
pub mod encoder;
pub mod models;
pub mod numerics;
pub mod synthetic;
