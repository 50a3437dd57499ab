use citeneed::models::{train_need, SplitSpec, TrainConfig, Variant};
use citeneed::numerics::AdamConfig;
use citeneed::synthetic::{planted_cue_corpus, SyntheticSpec};
use std::time::Instant;

fn main() {
    let (corpus, _) = planted_cue_corpus(&SyntheticSpec::default());
    for lr in [0.001, 0.005, 0.01] {
        for batch in [50, 100] {
            let cfg = TrainConfig {
                epochs: 10,
                batch_size: batch,
                hidden_dim: 16,
                embed_dim: 16,
                max_len: 20,
                adam: AdamConfig::with_learning_rate(lr),
                seed: 7,
                split: SplitSpec::Half,
                freeze_pretrained: true,
            };
            let start = Instant::now();
            let (_, history) = train_need(&corpus, &cfg, Variant::AttnWordSection, None).unwrap();
            let by_epoch: Vec<String> = history
                .epochs
                .iter()
                .map(|e| format!("{:.3}", e.eval_f1))
                .collect();
            println!(
                "lr={lr} batch={batch}: F1 by epoch [{}] in {:.1}s",
                by_epoch.join(", "),
                start.elapsed().as_secs_f64()
            );
        }
    }
}
