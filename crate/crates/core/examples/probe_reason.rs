use citeneed::models::{fine_tune_reason, train_need, SplitSpec, TrainConfig, Variant};
use citeneed::numerics::AdamConfig;
use citeneed::synthetic::planted_cue_reason_suite;
use std::time::Instant;

fn main() {
    let suite = planted_cue_reason_suite(400, 2000, 500, 9);
    let cfg = TrainConfig {
        epochs: 6,
        batch_size: 50,
        hidden_dim: 16,
        embed_dim: 16,
        max_len: 20,
        adam: AdamConfig::with_learning_rate(0.01),
        seed: 11,
        split: SplitSpec::Half,
        freeze_pretrained: true,
    };
    let start = Instant::now();
    let (pretrained, hist) = train_need(&suite.binary, &cfg, Variant::AttnWordSection, None).unwrap();
    println!("binary pretrain F1: {:.3} in {:.1}s", hist.epochs.last().unwrap().eval_f1, start.elapsed().as_secs_f64());
    for lr in [0.005, 0.01] {
        for epochs in [8, 10] {
            let ft_cfg = TrainConfig { epochs, adam: AdamConfig::with_learning_rate(lr), ..cfg.clone() };
            let start = Instant::now();
            let (_, hist) = fine_tune_reason(&pretrained, &suite.reasons, &ft_cfg).unwrap();
            let trace: Vec<String> = hist.epochs.iter().map(|e| format!("{:.3}", e.eval_f1)).collect();
            println!("lr={lr} epochs={epochs}: macro-F1 [{}] in {:.1}s", trace.join(", "), start.elapsed().as_secs_f64());
        }
    }
}
