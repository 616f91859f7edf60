//! Prediction-entropy analysis of two trained rankers.
//!
//! Trains a plain history-only model and a siamese-distilled one on the same
//! corpus, then compares the distribution of normalized prediction entropy on
//! held-out sessions. One-hot training tends to produce over-confident (low
//! entropy) predictions; peer distillation acts as a context-aware smoother.
//!
//! Run: `cargo run --release --example entropy_analysis`

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::entropy_distribution;
use foreranker::trainer::{train, TrainConfig, TrainMode};

fn main() {
    let gen = GenConfig {
        sessions: 300,
        drift_prob: 0.1,
        ..GenConfig::default()
    };
    let train_corpus = generate_corpus(&gen, 5).expect("valid config");
    let test_corpus = generate_corpus(
        &GenConfig {
            sessions: 150,
            ..gen.clone()
        },
        6,
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

    let bins = 10;
    let mut rows = Vec::new();
    for mode in [TrainMode::NoFuture, TrainMode::Siamese] {
        eprintln!("training {mode}...");
        let config = TrainConfig { mode, ..base.clone() };
        let outcome = train::<f32>(&config, &train_corpus).expect("training succeeds");
        let hist = entropy_distribution(&outcome.foreranker, &test_corpus, bins, false, 2)
            .expect("entropy histogram");
        rows.push((mode, hist));
    }

    println!("normalized prediction entropy on held-out queries:");
    println!("{:>12} {:>12} {:>12}", "bin", rows[0].0, rows[1].0);
    for i in 0..bins {
        let lo = i as f64 / bins as f64;
        let hi = (i + 1) as f64 / bins as f64;
        println!(
            "{:>5.1}-{:<5.1} {:>12} {:>12}",
            lo, hi, rows[0].1.counts[i], rows[1].1.counts[i]
        );
    }
    for (mode, hist) in &rows {
        println!("mean normalized entropy ({mode}): {:.4}", hist.mean_normalized_entropy);
    }
}
