//! Train the fused classifier on the synthetic oxygen task and compare it
//! with the image-only ablation.

use molcap::dataset::{featurize_dataset, holdout_split, synthetic_oxygen_corpus, FeaturizeConfig};
use molcap::maccs::default_keys;
use molcap::nn::{train, Model, ModelConfig, TrainConfig};

fn main() {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let corpus = synthetic_oxygen_corpus(200, 1);
    let feats = featurize_dataset(&corpus, &FeaturizeConfig::default(), default_keys());
    let (train_idx, val_idx) = holdout_split(&feats.labels(), 0.2, 0).unwrap();
    for (fp, keys) in [(true, true), (false, false)] {
        let config = ModelConfig {
            blocks_per_stage: 1,
            filters: 4,
            use_fingerprint: fp,
            use_keys: keys,
            ..ModelConfig::default()
        };
        let mut model = Model::<f32>::new(&config).unwrap();
        println!("fingerprint {fp}, keys {keys}: {} parameters", model.param_count());
        let cfg = TrainConfig {
            max_epochs: epochs,
            ..TrainConfig::default()
        };
        let out = train(&mut model, &feats.examples, &train_idx, &val_idx, &cfg).expect("training");
        for r in &out.history {
            println!(
                "  epoch {:>2} loss {:.4} val AUC {:.4} lr {:.5} ({:.1}s)",
                r.epoch, r.loss, r.val_auc, r.lr, r.seconds
            );
        }
        println!("  best AUC {:.4} at epoch {}", out.best_val_auc, out.best_epoch);
    }
}
