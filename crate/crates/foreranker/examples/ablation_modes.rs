//! The four training regimes side by side on one small corpus.
//!
//! Trains `siamese`, `no-future`, `no-peer`, and `no-gating` with identical
//! data, seeds, and hyperparameters, and reports held-out MAP for each
//! deployable history-conditioned model.
//!
//! Run: `cargo run --release --example ablation_modes`

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::{evaluate, EvalOptions};
use foreranker::trainer::{train, TrainConfig, TrainMode};

fn main() {
    let gen = GenConfig {
        sessions: 300,
        drift_prob: 0.1,
        ..GenConfig::default()
    };
    let train_corpus = generate_corpus(&gen, 21).expect("valid config");
    let test_corpus = generate_corpus(
        &GenConfig {
            sessions: 150,
            ..gen.clone()
        },
        22,
    )
    .expect("valid config");

    let base = TrainConfig {
        epochs: 8,
        batch_size: 32,
        learning_rate: 3e-3,
        seed: 0,
        max_len: 64,
        d_model: 24,
        n_layers: 2,
        n_heads: 2,
        d_ff: 48,
        head_hidden: 24,
        ..TrainConfig::default()
    };

    println!("{:<12} {:>8} {:>8} {:>8} {:>12}", "mode", "MAP", "MRR", "NDCG@1", "mean alpha");
    for mode in [
        TrainMode::Siamese,
        TrainMode::NoGating,
        TrainMode::NoPeer,
        TrainMode::NoFuture,
    ] {
        let config = TrainConfig { mode, ..base.clone() };
        let outcome = train::<f32>(&config, &train_corpus).expect("training succeeds");
        let opts = EvalOptions {
            seed: 0,
            ..EvalOptions::default()
        };
        let (metrics, _) = evaluate(&outcome.foreranker, &test_corpus, &opts).expect("evaluate");
        let alpha = outcome
            .report
            .mean_alpha
            .map_or("-".to_string(), |a| format!("{a:.3}"));
        println!(
            "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>12}",
            mode.to_string(),
            metrics.overall.map,
            metrics.overall.mrr,
            metrics.overall.ndcg[0].1,
            alpha
        );
    }
}
