//! End-to-end siamese training on a small synthetic corpus.
//!
//! Trains the history-conditioned ranker jointly with its future-aware twin
//! under gated peer distillation, then evaluates the deployable model on
//! held-out sessions.
//!
//! Run: `cargo run --release --example train_siamese`

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::{evaluate, EvalOptions};
use foreranker::trainer::{train, TrainConfig, TrainMode};

fn main() {
    let gen = GenConfig {
        sessions: 300,
        drift_prob: 0.1,
        ..GenConfig::default()
    };
    let train_corpus = generate_corpus(&gen, 1).expect("valid config");
    let test_corpus = generate_corpus(
        &GenConfig {
            sessions: 150,
            ..gen.clone()
        },
        2,
    )
    .expect("valid config");

    let config = TrainConfig {
        mode: TrainMode::Siamese,
        epochs: 8,
        batch_size: 32,
        learning_rate: 3e-3,
        future_budget: 2,
        seed: 0,
        max_len: 64,
        d_model: 24,
        n_layers: 2,
        n_heads: 2,
        d_ff: 48,
        head_hidden: 24,
        ..TrainConfig::default()
    };
    eprintln!(
        "training siamese twins on {} sessions, {} epochs...",
        gen.sessions, config.epochs
    );
    let outcome = train::<f32>(&config, &train_corpus).expect("training succeeds");

    let report = &outcome.report;
    let first = report.steps.first().unwrap();
    let last = report.steps.last().unwrap();
    println!("steps: {}", report.steps.len());
    println!(
        "history-model loss: {:.4} -> {:.4}",
        first.loss_h.unwrap(),
        last.loss_h.unwrap()
    );
    println!(
        "future-model loss:  {:.4} -> {:.4}",
        first.loss_f.unwrap(),
        last.loss_f.unwrap()
    );
    println!(
        "teacher gate rate (mean alpha): {:.3}",
        report.mean_alpha.unwrap()
    );

    let opts = EvalOptions {
        seed: 0,
        ..EvalOptions::default()
    };
    let (metrics, _) = evaluate(&outcome.foreranker, &test_corpus, &opts).expect("evaluate");
    println!("\nheld-out evaluation ({} queries):", metrics.evaluated_queries);
    println!("  MAP {:.4}  MRR {:.4}", metrics.overall.map, metrics.overall.mrr);
    for &(k, v) in &metrics.overall.ndcg {
        println!("  NDCG@{k:<2} {v:.4}");
    }
    println!(
        "  random-ranking baseline MAP: {:.4}",
        metrics.baseline_random.map
    );
}
