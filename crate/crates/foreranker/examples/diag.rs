use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::{evaluate, EvalOptions};
use foreranker::trainer::{train, TrainConfig, TrainMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let sessions: usize = args.get(1).map_or(2000, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(5, |s| s.parse().unwrap());
    let lr: f64 = args.get(3).map_or(3e-3, |s| s.parse().unwrap());
    let d: usize = args.get(4).map_or(24, |s| s.parse().unwrap());
    let mode: TrainMode = args.get(5).map_or("no-future".to_string(), |s| s.clone()).parse().unwrap();
    let wu: Option<u64> = args.get(6).and_then(|s| s.parse().ok());
    let tpt: usize = args.get(7).map_or(20, |s| s.parse().unwrap());
    let seed: u64 = args.get(8).map_or(0, |s| s.parse().unwrap());
    let noise: f64 = args.get(9).map_or(0.0, |s| s.parse().unwrap());

    let gen = GenConfig { sessions, drift_prob: 0.1, tokens_per_topic: tpt, click_noise: noise, ..GenConfig::default() };
    let train_corpus = generate_corpus(&gen, 1001).unwrap();
    let test_corpus = generate_corpus(&GenConfig { sessions: 500, ..gen.clone() }, 2002).unwrap();
    let config = TrainConfig {
        mode, epochs, batch_size: 32, learning_rate: lr, weight_decay: 0.01,
        warmup_steps: wu, warmup_power: 1.0, future_budget: 2, seed, max_len: 64,
        d_model: d, n_layers: 2, n_heads: 2, d_ff: d * 2, head_hidden: d,
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let out = train::<f32>(&config, &train_corpus).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let nll: Vec<f64> = out.report.steps.iter().filter_map(|s| s.nll_h.or(s.nll_f)).collect();
    let k = (nll.len() / 10).max(1);
    let traj: Vec<f64> = nll.iter().step_by(k).map(|x| (x * 100.0).round() / 100.0).collect();
    let opts = EvalOptions { seed, ..EvalOptions::default() };
    let (rep, _) = evaluate(&out.foreranker, &test_corpus, &opts).unwrap();
    print!(
        "mode {mode:?} lr {lr} d {d} ep {epochs} wu {wu:?} tpt {tpt} noise {noise} seed {seed}: MAP {:.4} ndcg@1 {:.4} ({secs:.0}s, alpha {:?})",
        rep.overall.map, rep.overall.ndcg[0].1, out.report.mean_alpha
    );
    // Future twin's own quality (information channel check).
    if let Some(fut) = &out.future {
        let fopts = EvalOptions { with_future: true, seed, ..EvalOptions::default() };
        let (frep, _) = evaluate(fut, &test_corpus, &fopts).unwrap();
        print!(" futureMAP {:.4}", frep.overall.map);
    }
    println!();
    println!("  nll traj {traj:?}");
}
