//! Scratch calibration harness (temporary).

use std::time::Instant;

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::{evaluate, paired_t_test, EvalOptions};
use foreranker::trainer::{train, TrainConfig, TrainMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let train_sessions: usize = args.get(1).map_or(400, |s| s.parse().unwrap());
    let test_sessions: usize = args.get(2).map_or(200, |s| s.parse().unwrap());
    let epochs: usize = args.get(3).map_or(2, |s| s.parse().unwrap());
    let d_model: usize = args.get(4).map_or(24, |s| s.parse().unwrap());
    let seeds: u64 = args.get(5).map_or(3, |s| s.parse().unwrap());
    let lr: f64 = args.get(6).map_or(1e-3, |s| s.parse().unwrap());

    let gen = GenConfig {
        sessions: train_sessions,
        drift_prob: 0.1,
        candidates_per_query: 5,
        ..GenConfig::default()
    };
    let train_corpus = generate_corpus(&gen, 1001).unwrap();
    let test_corpus = generate_corpus(
        &GenConfig {
            sessions: test_sessions,
            ..gen.clone()
        },
        2002,
    )
    .unwrap();

    let mut maps_siamese = Vec::new();
    let mut maps_nofuture = Vec::new();
    for seed in 0..seeds {
        for mode in [TrainMode::Siamese, TrainMode::NoFuture] {
            let config = TrainConfig {
                mode,
                epochs,
                batch_size: 32,
                learning_rate: lr,
                weight_decay: 0.01,
                warmup_steps: None,
                warmup_power: 1.0,
                future_budget: 2,
                seed,
                max_len: 64,
                d_model,
                n_layers: 2,
                n_heads: 2,
                d_ff: d_model * 2,
                head_hidden: d_model,
                ..TrainConfig::default()
            };
            let t0 = Instant::now();
            let out = train::<f32>(&config, &train_corpus).unwrap();
            let train_secs = t0.elapsed().as_secs_f64();
            let n = out.report.steps.len();
            let h_losses: Vec<f64> = out.report.steps.iter().filter_map(|s| s.nll_h).collect();
            if !h_losses.is_empty() {
                let head = &h_losses[..5.min(h_losses.len())];
                let tail = &h_losses[h_losses.len().saturating_sub(5)..];
                println!(
                    "  nll_h first {head:?} last {tail:?} ({n} steps)"
                );
            }
            let opts = EvalOptions {
                seed,
                ..EvalOptions::default()
            };
            let (report, _) = evaluate(&out.foreranker, &test_corpus, &opts).unwrap();
            println!(
                "seed {seed} mode {mode:?}: test MAP {:.4} MRR {:.4} ndcg@1 {:.4} (train {train_secs:.1}s, mean_alpha {:?}, baseline {:.4})",
                report.overall.map,
                report.overall.mrr,
                report.overall.ndcg[0].1,
                out.report.mean_alpha,
                report.baseline_random.map,
            );
            match mode {
                TrainMode::Siamese => maps_siamese.push(report.overall.map),
                _ => maps_nofuture.push(report.overall.map),
            }
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ms = mean(&maps_siamese);
    let mn = mean(&maps_nofuture);
    println!("siamese {:?} mean {ms:.4}", maps_siamese);
    println!("nofuture {:?} mean {mn:.4}", maps_nofuture);
    println!("relative improvement: {:.2}%", (ms - mn) / mn * 100.0);
    if maps_siamese.len() >= 2 {
        let t = paired_t_test(&maps_siamese, &maps_nofuture).unwrap();
        println!("paired t {:.3} p {:.4}", t.t_stat, t.p_value);
    }
}
