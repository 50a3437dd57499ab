//! Planted-cue synthetic corpora.
//!
//! Class membership is decided by the presence of designated cue tokens,
//! so separability is known by construction: these corpora are the oracle
//! for end-to-end training tests and for the acceptance suite.

use crate::corpus::{
    tokenize, DatasetId, Label, LabeledInstance, Reason, ReasonInstance, Statement,
};
use crate::numerics::rng::SplitMix64;

const SECTIONS: [&str; 4] = ["history", "reception", "legacy", "description"];

/// Shape of a planted-cue corpus.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n_sentences: usize,
    pub vocab_size: usize,
    pub n_cues: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_sentences: 2_000,
            vocab_size: 500,
            n_cues: 10,
            min_len: 5,
            max_len: 15,
            seed: 1,
        }
    }
}

fn filler_token(i: usize) -> String {
    format!("w{i:04}")
}

fn make_statement(
    tokens: Vec<String>,
    index: usize,
    cited: bool,
    rng: &mut SplitMix64,
) -> Statement {
    let text = tokens.join(" ");
    let is_lead = rng.below(4) == 0;
    let section_heading = if is_lead {
        String::new()
    } else {
        SECTIONS[rng.below(SECTIONS.len())].to_string()
    };
    Statement {
        article_id: format!("synth{index:05}"),
        section_heading,
        is_lead,
        tokens: tokenize(&text),
        text,
        has_inline_citation: cited,
        has_citation_needed_tag: false,
    }
}

fn filler_sentence(spec: &SyntheticSpec, n_cue_tokens: usize, rng: &mut SplitMix64) -> Vec<String> {
    let len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
    let n_fillers = spec.vocab_size.saturating_sub(n_cue_tokens).max(1);
    (0..len).map(|_| filler_token(rng.below(n_fillers))).collect()
}

/// Binary planted-cue corpus: positives contain exactly one cue token at a
/// random position, negatives contain none. Balanced, shuffled, labeled as
/// FA instances. Returns the corpus and the cue token list.
pub fn planted_cue_corpus(spec: &SyntheticSpec) -> (Vec<LabeledInstance>, Vec<String>) {
    let cues: Vec<String> = (0..spec.n_cues).map(|i| format!("cue{i:02}")).collect();
    let mut rng = SplitMix64::new(spec.seed);
    let mut instances = Vec::with_capacity(spec.n_sentences);
    for i in 0..spec.n_sentences {
        let positive = i % 2 == 0;
        let mut tokens = filler_sentence(spec, cues.len(), &mut rng);
        if positive {
            let at = rng.below(tokens.len());
            tokens[at] = cues[rng.below(cues.len())].clone();
        }
        instances.push(LabeledInstance {
            statement: make_statement(tokens, i, positive, &mut rng),
            label: if positive {
                Label::Positive
            } else {
                Label::Negative
            },
            dataset: DatasetId::Fa,
        });
    }
    rng.shuffle(&mut instances);
    (instances, cues)
}

/// A reason corpus plus a matching binary pretraining corpus over the same
/// token space: every reason class has its own cue tokens, the binary
/// positives contain some class cue and the negatives none.
#[derive(Debug, Clone)]
pub struct ReasonSuite {
    pub binary: Vec<LabeledInstance>,
    pub reasons: Vec<ReasonInstance>,
    /// Cue tokens per reason class, indexed by `Reason::index()`.
    pub cues: Vec<Vec<String>>,
}

pub fn planted_cue_reason_suite(
    n_per_class: usize,
    n_binary: usize,
    vocab_size: usize,
    seed: u64,
) -> ReasonSuite {
    let cues_per_class = 3usize;
    let cues: Vec<Vec<String>> = Reason::ALL
        .iter()
        .map(|r| {
            (0..cues_per_class)
                .map(|j| format!("{}cue{j}", r.as_str()))
                .collect()
        })
        .collect();
    let n_cue_tokens = cues_per_class * Reason::ALL.len();
    let spec = SyntheticSpec {
        n_sentences: 0,
        vocab_size,
        n_cues: n_cue_tokens,
        min_len: 5,
        max_len: 15,
        seed,
    };
    let mut rng = SplitMix64::new(seed);

    let mut reasons = Vec::with_capacity(n_per_class * Reason::ALL.len());
    let mut index = 0usize;
    for _ in 0..n_per_class {
        for reason in Reason::ALL {
            let mut tokens = filler_sentence(&spec, n_cue_tokens, &mut rng);
            let class_cues = &cues[reason.index()];
            let at = rng.below(tokens.len());
            tokens[at] = class_cues[rng.below(class_cues.len())].clone();
            reasons.push(ReasonInstance {
                statement: make_statement(tokens, index, true, &mut rng),
                reason,
            });
            index += 1;
        }
    }
    rng.shuffle(&mut reasons);

    let mut binary = Vec::with_capacity(n_binary);
    for i in 0..n_binary {
        let positive = i % 2 == 0;
        let mut tokens = filler_sentence(&spec, n_cue_tokens, &mut rng);
        if positive {
            let class = rng.below(Reason::ALL.len());
            let at = rng.below(tokens.len());
            tokens[at] = cues[class][rng.below(cues_per_class)].clone();
        }
        binary.push(LabeledInstance {
            statement: make_statement(tokens, index, positive, &mut rng),
            label: if positive {
                Label::Positive
            } else {
                Label::Negative
            },
            dataset: DatasetId::Fa,
        });
        index += 1;
    }
    rng.shuffle(&mut binary);

    ReasonSuite {
        binary,
        reasons,
        cues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_dataset;

    #[test]
    fn corpus_is_balanced_and_cue_separable() {
        let spec = SyntheticSpec {
            n_sentences: 200,
            ..SyntheticSpec::default()
        };
        let (corpus, cues) = planted_cue_corpus(&spec);
        assert_eq!(corpus.len(), 200);
        validate_dataset(&corpus).unwrap();
        let positives = corpus.iter().filter(|i| i.label == Label::Positive).count();
        assert_eq!(positives, 100);
        for instance in &corpus {
            let has_cue = instance
                .statement
                .tokens
                .iter()
                .any(|t| cues.contains(t));
            assert_eq!(has_cue, instance.label == Label::Positive);
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = SyntheticSpec {
            n_sentences: 50,
            ..SyntheticSpec::default()
        };
        let (a, _) = planted_cue_corpus(&spec);
        let (b, _) = planted_cue_corpus(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn reason_suite_is_balanced_and_class_separable() {
        let suite = planted_cue_reason_suite(10, 40, 300, 3);
        assert_eq!(suite.reasons.len(), 80);
        assert_eq!(suite.binary.len(), 40);
        for reason in Reason::ALL {
            let count = suite.reasons.iter().filter(|r| r.reason == reason).count();
            assert_eq!(count, 10);
        }
        for instance in &suite.reasons {
            let class = instance.reason.index();
            let has_own_cue = instance
                .statement
                .tokens
                .iter()
                .any(|t| suite.cues[class].contains(t));
            assert!(has_own_cue);
            // And no other class's cue.
            for (other, cue_set) in suite.cues.iter().enumerate() {
                if other != class {
                    assert!(!instance
                        .statement
                        .tokens
                        .iter()
                        .any(|t| cue_set.contains(t)));
                }
            }
        }
    }
}
