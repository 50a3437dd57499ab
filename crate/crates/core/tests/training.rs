//! End-to-end training behavior on planted-cue corpora: determinism,
//! monotone full-batch loss, checkpoint round-trips, and attention
//! inspection.

use citeneed::models::{
    evaluate, fine_tune_reason, load_need_checkpoint, load_reason_checkpoint,
    save_need_checkpoint, save_reason_checkpoint, split_corpus, train_need, SplitSpec,
    TrainConfig, Variant,
};
use citeneed::numerics::AdamConfig;
use citeneed::synthetic::{planted_cue_corpus, planted_cue_reason_suite, SyntheticSpec};

fn small_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 4,
        batch_size: 25,
        hidden_dim: 8,
        embed_dim: 8,
        max_len: 18,
        adam: AdamConfig::with_learning_rate(0.01),
        seed,
        split: SplitSpec::Half,
        freeze_pretrained: true,
    }
}

fn small_corpus(seed: u64) -> Vec<citeneed::corpus::LabeledInstance> {
    let spec = SyntheticSpec {
        n_sentences: 240,
        vocab_size: 60,
        n_cues: 6,
        min_len: 5,
        max_len: 12,
        seed,
    };
    planted_cue_corpus(&spec).0
}

#[test]
fn training_is_deterministic_to_the_checkpoint_byte() {
    let corpus = small_corpus(3);
    let cfg = small_cfg(11);
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.ckpt"), dir.path().join("b.ckpt"));
    let (m1, h1) = train_need(&corpus, &cfg, Variant::AttnWordSection, None).unwrap();
    let (m2, h2) = train_need(&corpus, &cfg, Variant::AttnWordSection, None).unwrap();
    assert_eq!(h1, h2);
    save_need_checkpoint(&m1, &p1).unwrap();
    save_need_checkpoint(&m2, &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn full_batch_training_loss_is_non_increasing() {
    let corpus = small_corpus(5);
    // Full-batch mode: batch as large as the training split, gentle rate.
    let cfg = TrainConfig {
        epochs: 8,
        batch_size: corpus.len(),
        adam: AdamConfig::with_learning_rate(0.002),
        ..small_cfg(7)
    };
    let (_, history) = train_need(&corpus, &cfg, Variant::AttnWordSection, None).unwrap();
    for pair in history.epochs.windows(2) {
        assert!(
            pair[1].train_loss <= pair[0].train_loss + 1e-9,
            "loss rose: {} -> {}",
            pair[0].train_loss,
            pair[1].train_loss
        );
    }
}

#[test]
fn checkpoint_round_trip_reproduces_forward_outputs_bit_for_bit() {
    let corpus = small_corpus(9);
    let cfg = small_cfg(13);
    for variant in Variant::ALL {
        let (model, _) = train_need(&corpus, &cfg, variant, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_need_checkpoint(&model, &path).unwrap();
        let loaded = load_need_checkpoint(&path).unwrap();
        for instance in corpus.iter().take(10) {
            let a = model.forward(&instance.statement).unwrap();
            let b = loaded.forward(&instance.statement).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "variant {variant:?}");
        }
    }
}

#[test]
fn truncated_checkpoint_is_an_integrity_error() {
    let corpus = small_corpus(1);
    let cfg = small_cfg(2);
    let (model, _) = train_need(&corpus, &cfg, Variant::RnnWord, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_need_checkpoint(&model, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
    assert!(load_need_checkpoint(&path).is_err());
}

#[test]
fn need_checkpoint_does_not_load_as_reason_model() {
    let corpus = small_corpus(6);
    let (model, _) = train_need(&corpus, &small_cfg(3), Variant::AttnWordSection, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("need.ckpt");
    save_need_checkpoint(&model, &path).unwrap();
    let err = load_reason_checkpoint(&path).unwrap_err();
    assert!(err.to_string().contains("need"), "err: {err}");
}

#[test]
fn reason_checkpoint_round_trips() {
    let suite = planted_cue_reason_suite(12, 120, 80, 21);
    let cfg = small_cfg(5);
    let (pretrained, _) = train_need(&suite.binary, &cfg, Variant::AttnWordSection, None).unwrap();
    let (reason, _) = fine_tune_reason(&pretrained, &suite.reasons, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reason.ckpt");
    save_reason_checkpoint(&reason, &path).unwrap();
    let loaded = load_reason_checkpoint(&path).unwrap();
    for instance in suite.reasons.iter().take(10) {
        let a = reason.forward(&instance.statement).unwrap();
        let b = loaded.forward(&instance.statement).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

// On the planted-cue corpus a trained attention model should put its peak
// weight on the cue token in most positive eval sentences.
#[test]
fn attention_peaks_on_the_planted_cue() {
    let spec = SyntheticSpec {
        n_sentences: 600,
        vocab_size: 100,
        n_cues: 8,
        min_len: 6,
        max_len: 12,
        seed: 17,
    };
    let (corpus, cues) = planted_cue_corpus(&spec);
    let cfg = TrainConfig {
        epochs: 8,
        ..small_cfg(23)
    };
    let (model, _) = train_need(&corpus, &cfg, Variant::AttnWordSection, None).unwrap();
    let split = split_corpus(corpus.len(), cfg.split, cfg.seed);
    let mut peaked = 0usize;
    let mut positives = 0usize;
    for &i in &split.eval {
        let instance = &corpus[i];
        if instance.label != citeneed::corpus::Label::Positive {
            continue;
        }
        positives += 1;
        let (_, weights) = model.predict_with_attention(&instance.statement).unwrap();
        let mut best = 0;
        for (t, w) in weights.iter().enumerate() {
            if *w > weights[best] {
                best = t;
            }
        }
        if cues.contains(&instance.statement.tokens[best]) {
            peaked += 1;
        }
    }
    let rate = peaked as f64 / positives as f64;
    assert!(rate >= 0.8, "cue got peak weight in only {:.1}% of positives", rate * 100.0);
}

#[test]
fn single_class_and_empty_corpora_are_rejected() {
    let corpus = small_corpus(2);
    let positives: Vec<_> = corpus
        .iter()
        .filter(|i| i.label == citeneed::corpus::Label::Positive)
        .cloned()
        .collect();
    assert!(train_need(&positives, &small_cfg(1), Variant::RnnWord, None).is_err());
    assert!(train_need(&[], &small_cfg(1), Variant::RnnWord, None).is_err());
    let (model, _) = train_need(&corpus, &small_cfg(1), Variant::RnnWord, None).unwrap();
    assert!(evaluate(&model, &[]).is_err());
}

// Cross-dataset evaluation: train on one planted-cue corpus, evaluate on a
// fresh one drawn with the same cue set.
#[test]
fn cross_dataset_evaluation_runs() {
    let spec_a = SyntheticSpec {
        n_sentences: 600,
        vocab_size: 60,
        n_cues: 6,
        min_len: 5,
        max_len: 12,
        seed: 31,
    };
    let spec_b = SyntheticSpec { seed: 99, ..spec_a.clone() };
    let (train, _) = planted_cue_corpus(&spec_a);
    let (test, _) = planted_cue_corpus(&spec_b);
    let cfg = TrainConfig {
        epochs: 8,
        ..small_cfg(41)
    };
    let (model, _) = train_need(&train, &cfg, Variant::AttnWordSection, None).unwrap();
    let report = evaluate(&model, &test).unwrap();
    assert!(report.accuracy > 0.9, "cross-dataset accuracy {}", report.accuracy);
}
