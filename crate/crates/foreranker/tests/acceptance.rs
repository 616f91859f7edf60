//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see every line.
//!
//! Full-scale log benchmarks sit far outside a desk build (BERT-scale
//! backbones over half a million training queries); published full-scale
//! results are recorded in `reference_values_full_scale` as orientation
//! points only. Acceptance rests on the property suites and the synthetic
//! experiment below.

use std::time::Instant;

use foreranker::corpus::{generate_corpus, GenConfig, InputVariant, SerializedInput};
use foreranker::encoder::{
    backward, forward, init_params, init_siamese, ArchConfig, ModelParams, Vocabulary,
};
use foreranker::eval::{paired_t_test, EvalOptions};
use foreranker::objectives::{
    combined_losses, combined_score_grads, entropy, gate_alpha, kl_divergence,
    label_smooth_targets, nll_loss, smoothed_ce_loss, softmax_scores, GateSignal,
    RelevanceDistribution,
};
use foreranker::trainer::{train, TrainConfig, TrainMode};
use rand::Rng;

fn rng(label: &str) -> rand_chacha::ChaCha8Rng {
    foreranker::seeding::rng_for(0xACCE97, label)
}

#[test]
fn reference_values_full_scale() {
    // Full-scale reference points (not reproduced at this scale): a
    // BERT-backed ForeRanker on the AOL benchmark reports MAP 0.5737 and
    // NDCG@1 0.4255, with ablation drops of -2.84% MAP without future
    // signal and -0.97% without gating.
    const REF_MAP: f64 = 0.5737;
    const REF_NDCG1: f64 = 0.4255;
    println!(
        "[PASS] reference_values_full_scale: recorded MAP {REF_MAP} / NDCG@1 {REF_NDCG1} \
         (orientation only; not a desk-scale target)"
    );
}

// ---------------------------------------------------------------------------
// Loss oracle suite
// ---------------------------------------------------------------------------

/// High-precision brute-force evaluations of the loss formulas, written
/// directly from their definitions and independent of the library paths.
mod loss_oracle {
    pub fn softmax(scores: &[f64]) -> Vec<f64> {
        // Plain exponentials; inputs are kept in a safe range by the caller.
        let exps: Vec<f64> = scores.iter().map(|&s| s.exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.iter().map(|&e| e / sum).collect()
    }

    pub fn nll(scores: &[f64], positive: usize) -> f64 {
        -softmax(scores)[positive].ln()
    }

    pub fn kl(target: &[f64], approx: &[f64]) -> f64 {
        target
            .iter()
            .zip(approx)
            .map(|(&t, &a)| if t == 0.0 { 0.0 } else { t * (t / a).ln() })
            .sum()
    }

    pub fn entropy(probs: &[f64]) -> f64 {
        probs
            .iter()
            .map(|&p| if p == 0.0 { 0.0 } else { -p * p.ln() })
            .sum()
    }

    pub fn smooth(labels: &[bool], gamma: f64) -> Vec<f64> {
        let n = labels.len() as f64;
        labels
            .iter()
            .map(|&y| (if y { 1.0 } else { 0.0 }) * (1.0 - gamma) + gamma / n)
            .collect()
    }

    pub fn smoothed_ce(scores: &[f64], targets: &[f64]) -> f64 {
        let p = softmax(scores);
        targets
            .iter()
            .zip(&p)
            .map(|(&t, &q)| if t == 0.0 { 0.0 } else { -t * q.ln() })
            .sum()
    }
}

#[test]
fn loss_oracle_suite() {
    let started = Instant::now();
    let mut rng = rng("loss-oracle");
    let mut checked = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(2..9);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let teacher_scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let positive = rng.gen_range(0..n);
        let gamma = rng.gen_range(0.0..0.9);
        let labels: Vec<bool> = (0..n).map(|j| j == positive).collect();

        let got_nll = nll_loss(&scores, positive).unwrap();
        assert!((got_nll - loss_oracle::nll(&scores, positive)).abs() < 1e-9);

        let target = softmax_scores(&teacher_scores).unwrap();
        let approx = softmax_scores(&scores).unwrap();
        let got_kl = kl_divergence(&target, &approx).unwrap();
        let want_kl = loss_oracle::kl(
            &loss_oracle::softmax(&teacher_scores),
            &loss_oracle::softmax(&scores),
        );
        assert!((got_kl - want_kl).abs() < 1e-9);

        let got_entropy = entropy(&approx, false);
        let want_entropy = loss_oracle::entropy(&loss_oracle::softmax(&scores));
        assert!((got_entropy - want_entropy).abs() < 1e-9);

        let got_targets = label_smooth_targets(&labels, gamma).unwrap();
        let want_targets = loss_oracle::smooth(&labels, gamma);
        for (a, b) in got_targets.iter().zip(&want_targets) {
            assert!((a - b).abs() < 1e-9);
        }

        let got_ce = smoothed_ce_loss(&scores, &got_targets).unwrap();
        assert!((got_ce - loss_oracle::smoothed_ce(&scores, &want_targets)).abs() < 1e-9);
        checked += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 10.0, "loss oracle suite took {secs:.1}s (budget 10s)");
    println!(
        "[PASS] loss_oracle_suite: {checked} random instances within 1e-9 in {secs:.2}s"
    );
}

// ---------------------------------------------------------------------------
// Gradient suite
// ---------------------------------------------------------------------------

struct TinyInstance {
    inputs_h: Vec<SerializedInput>,
    inputs_f: Vec<SerializedInput>,
    positive: usize,
}

fn tiny_instance(rng: &mut impl Rng, vocab_size: u32, n_cands: usize) -> TinyInstance {
    let mut shared: Vec<u32> = vec![2];
    for _ in 0..rng.gen_range(2..5) {
        shared.push(rng.gen_range(4..vocab_size));
    }
    shared.push(3);
    let mut inputs_h = Vec::new();
    let mut inputs_f = Vec::new();
    for _ in 0..n_cands {
        let mut ids = shared.clone();
        for _ in 0..rng.gen_range(2..5) {
            ids.push(rng.gen_range(4..vocab_size));
        }
        ids.push(3);
        inputs_h.push(SerializedInput {
            token_ids: ids.clone(),
            variant: InputVariant::HistoryOnly,
        });
        let mut with_future = ids;
        for _ in 0..rng.gen_range(1..4) {
            with_future.push(rng.gen_range(4..vocab_size));
        }
        with_future.push(3);
        inputs_f.push(SerializedInput {
            token_ids: with_future,
            variant: InputVariant::HistoryPlusFuture,
        });
    }
    TinyInstance {
        inputs_h,
        inputs_f,
        positive: rng.gen_range(0..n_cands),
    }
}

fn scores_of(params: &ModelParams<f64>, inputs: &[SerializedInput]) -> Vec<f64> {
    inputs
        .iter()
        .map(|x| forward(params, x).unwrap().score)
        .collect()
}

/// The composed per-instance losses with the peer distribution captured as a
/// constant (the stop-gradient convention used in training).
fn composed_losses(
    scores_f: &[f64],
    scores_h: &[f64],
    positive: usize,
    alpha: GateSignal,
    omega: f64,
) -> (f64, f64) {
    let p_f = softmax_scores(scores_f).unwrap();
    let p_h = softmax_scores(scores_h).unwrap();
    let nll_f = nll_loss(scores_f, positive).unwrap();
    let nll_h = nll_loss(scores_h, positive).unwrap();
    let kl_f = kl_divergence(&p_h, &p_f).unwrap();
    let kl_h = kl_divergence(&p_f, &p_h).unwrap();
    combined_losses(alpha, nll_f, kl_f, nll_h, kl_h, omega)
}

#[test]
fn gradient_suite() {
    let started = Instant::now();
    let arch = ArchConfig {
        vocab_size: 30,
        max_len: 32,
        d_model: 8,
        n_layers: 1,
        n_heads: 2,
        d_ff: 16,
        head_hidden: 8,
    };
    let (params_h, mut params_f) = init_siamese::<f64>(&arch, 7).unwrap();
    assert!(params_h.param_count() <= 5000, "tiny encoder budget");
    // Nudge the twins apart so the gate and KL terms are non-trivial.
    {
        let mut flat = params_f.to_flat();
        let mut r = rng("grad-nudge");
        for x in flat.iter_mut() {
            *x += r.gen_range(-0.02..0.02);
        }
        params_f.copy_from_flat(&flat);
    }

    let mut r = rng("grad-suite");
    let omega = 0.3;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let inst = tiny_instance(&mut r, arch.vocab_size as u32, 4);

        let scores_h = scores_of(&params_h, &inst.inputs_h);
        let scores_f = scores_of(&params_f, &inst.inputs_f);
        let alpha = gate_alpha(scores_f[inst.positive], scores_h[inst.positive]).unwrap();

        // Analytic gradients through the full encoder.
        let (dscores_f, dscores_h) =
            combined_score_grads(alpha, &scores_f, &scores_h, inst.positive, omega).unwrap();
        let mut grads_h = ModelParams::<f64>::zeros(&arch);
        for (x, &ds) in inst.inputs_h.iter().zip(&dscores_h) {
            let cache = forward(&params_h, x).unwrap();
            backward(&params_h, &cache, ds, &mut grads_h);
        }
        let mut grads_f = ModelParams::<f64>::zeros(&arch);
        for (x, &ds) in inst.inputs_f.iter().zip(&dscores_f) {
            let cache = forward(&params_f, x).unwrap();
            backward(&params_f, &cache, ds, &mut grads_f);
        }

        // Central differences, peer side frozen (stop-gradient semantics).
        let step = 1e-5;
        let check = |params: &ModelParams<f64>,
                     analytic: &ModelParams<f64>,
                     loss: &dyn Fn(&ModelParams<f64>) -> f64|
         -> f64 {
            let flat = params.to_flat();
            let grad = analytic.to_flat();
            let mut scratch = params.clone();
            let mut worst = 0.0f64;
            for i in 0..flat.len() {
                let mut probe = flat.clone();
                probe[i] += step;
                scratch.copy_from_flat(&probe);
                let up = loss(&scratch);
                probe[i] -= 2.0 * step;
                scratch.copy_from_flat(&probe);
                let down = loss(&scratch);
                let fd = (up - down) / (2.0 * step);
                let denom = grad[i].abs().max(fd.abs()).max(1e-6);
                worst = worst.max((grad[i] - fd).abs() / denom);
            }
            worst
        };

        let sf = scores_f.clone();
        let loss_h = |p: &ModelParams<f64>| {
            let sh = scores_of(p, &inst.inputs_h);
            composed_losses(&sf, &sh, inst.positive, alpha, omega).1
        };
        worst = worst.max(check(&params_h, &grads_h, &loss_h));

        let sh = scores_h.clone();
        let loss_f = |p: &ModelParams<f64>| {
            let sf = scores_of(p, &inst.inputs_f);
            composed_losses(&sf, &sh, inst.positive, alpha, omega).0
        };
        worst = worst.max(check(&params_f, &grads_f, &loss_f));
    }

    let secs = started.elapsed().as_secs_f64();
    assert!(worst < 1e-4, "max relative error {worst}");
    assert!(secs < 120.0, "gradient suite took {secs:.1}s (budget 120s)");
    println!(
        "[PASS] gradient_suite: composed-loss gradients within {worst:.2e} of finite \
         differences ({} params, {secs:.1}s)",
        params_h.param_count()
    );
}

// ---------------------------------------------------------------------------
// Gating suite
// ---------------------------------------------------------------------------

#[test]
fn gating_suite() {
    let mut r = rng("gating");
    let mut ties = 0usize;
    for i in 0..1000 {
        let s_h = r.gen_range(-5.0..5.0);
        let s_f = if i % 7 == 0 {
            ties += 1;
            s_h
        } else {
            r.gen_range(-5.0..5.0)
        };
        let got = gate_alpha(s_f, s_h).unwrap();
        let want = if s_f > s_h {
            GateSignal::FutureTeacher
        } else {
            GateSignal::HistoryTeacher
        };
        assert_eq!(got, want, "s_f {s_f} s_h {s_h}");
    }
    assert!(ties > 100, "tie cases must be exercised");

    // Closed-form corner selections, exact equality.
    let (nll_f, kl_f, nll_h, kl_h) = (0.37, 1.21, 0.94, 0.18);
    for (alpha, omega, want) in [
        (GateSignal::FutureTeacher, 0.0, (nll_f, kl_h)),
        (GateSignal::HistoryTeacher, 0.0, (kl_f, nll_h)),
        (GateSignal::FutureTeacher, 1.0, (nll_f, nll_h)),
        (GateSignal::HistoryTeacher, 1.0, (nll_f, nll_h)),
    ] {
        let got = combined_losses(alpha, nll_f, kl_f, nll_h, kl_h, omega);
        assert_eq!(got, want, "alpha {alpha:?} omega {omega}");
    }
    println!("[PASS] gating_suite: 1000 random pairs (incl. {ties} ties) and exact corner selections");
}

// ---------------------------------------------------------------------------
// Metric oracle suite
// ---------------------------------------------------------------------------

#[test]
fn metric_oracle_suite() {
    use foreranker::eval::{average_precision, ndcg_at_k, reciprocal_rank, RankedResult};

    let reference_ap = |rels: &[bool]| -> Option<f64> {
        let total = rels.iter().filter(|&&x| x).count();
        if total == 0 {
            return None;
        }
        let mut sum = 0.0;
        for r in 0..rels.len() {
            if rels[r] {
                sum += rels[..=r].iter().filter(|&&x| x).count() as f64 / (r + 1) as f64;
            }
        }
        Some(sum / total as f64)
    };
    let reference_rr = |rels: &[bool]| -> Option<f64> {
        rels.iter().position(|&x| x).map(|i| 1.0 / (i + 1) as f64)
    };
    let reference_ndcg = |rels: &[bool], k: usize| -> Option<f64> {
        let total = rels.iter().filter(|&&x| x).count();
        if total == 0 {
            return None;
        }
        let dcg: f64 = rels
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, &x)| if x { 1.0 / ((i + 2) as f64).log2() } else { 0.0 })
            .sum();
        let idcg: f64 = (0..total.min(k)).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
        Some(dcg / idcg)
    };

    let from_rels = |rels: &[bool]| -> RankedResult {
        let ids: Vec<String> = (0..rels.len()).map(|i| format!("d{i}")).collect();
        let scores: Vec<f64> = (0..rels.len()).map(|i| (rels.len() - i) as f64).collect();
        RankedResult::from_scores("q", &ids, &scores, rels).unwrap()
    };

    let mut r = rng("metric-oracle");
    for _ in 0..1000 {
        let n = r.gen_range(1..=10);
        let rels: Vec<bool> = (0..n).map(|_| r.gen_bool(0.35)).collect();
        let result = from_rels(&rels);
        for (got, want) in [
            (average_precision(&result), reference_ap(&rels)),
            (reciprocal_rank(&result), reference_rr(&rels)),
        ] {
            match (got, want) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                (a, b) => assert_eq!(a, b),
            }
        }
        for k in [1usize, 3, 5, 10] {
            match (ndcg_at_k(&result, k), reference_ndcg(&rels, k)) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    // Hand-computed cases, exact.
    let ap_case = from_rels(&[true, false, true, false, false]);
    assert_eq!(average_precision(&ap_case).unwrap(), (1.0 + 2.0 / 3.0) / 2.0);
    let ndcg_case = from_rels(&[false, true, false, false, false]);
    assert_eq!(ndcg_at_k(&ndcg_case, 5).unwrap(), 1.0 / 3f64.log2());
    let rr_case = from_rels(&[false, false, true]);
    assert_eq!(reciprocal_rank(&rr_case).unwrap(), 1.0 / 3.0);

    println!(
        "[PASS] metric_oracle_suite: 1000 random rankings within 1e-12; hand cases \
         (AP 0.833333, NDCG@5 0.630930, MRR 1/3) exact"
    );
}

// ---------------------------------------------------------------------------
// BM25 suite
// ---------------------------------------------------------------------------

#[test]
fn bm25_suite() {
    use foreranker::corpus::Document;
    use foreranker::retrieval::{bm25_score, build_index, DEFAULT_B, DEFAULT_K1};

    let mut r = rng("bm25");
    let vocab: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let pool: Vec<Document> = (0..60)
        .map(|i| Document {
            doc_id: format!("d{i:03}"),
            tokens: (0..r.gen_range(1..15))
                .map(|_| vocab[r.gen_range(0..vocab.len())].clone())
                .collect(),
            clicked: false,
        })
        .collect();
    let index = build_index(&pool).unwrap();

    let brute = |query: &[String], doc_id: &str| -> f64 {
        let n = pool.len() as f64;
        let avglen = pool.iter().map(|d| d.tokens.len()).sum::<usize>() as f64 / n;
        let doc = pool.iter().find(|d| d.doc_id == doc_id).unwrap();
        let len = doc.tokens.len() as f64;
        let mut score = 0.0;
        for term in query {
            let tf = doc.tokens.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = pool
                .iter()
                .filter(|d| d.tokens.iter().any(|t| t == term))
                .count() as f64;
            let idf = (n / (df + 0.5) + 1.0).ln();
            score += idf * tf * (DEFAULT_K1 + 1.0)
                / (tf + DEFAULT_K1 * (1.0 - DEFAULT_B + DEFAULT_B * len / avglen));
        }
        score
    };

    for _ in 0..1000 {
        let query: Vec<String> = (0..r.gen_range(1..5))
            .map(|_| vocab[r.gen_range(0..vocab.len())].clone())
            .collect();
        let doc_id = pool[r.gen_range(0..pool.len())].doc_id.clone();
        let fast = bm25_score(&index, &query, &doc_id, DEFAULT_K1, DEFAULT_B).unwrap();
        assert_eq!(fast, brute(&query, &doc_id), "query {query:?} doc {doc_id}");
    }

    // Hand-derived single-document case.
    let single = build_index(&[Document {
        doc_id: "d0".into(),
        tokens: vec!["a".into()],
        clicked: false,
    }])
    .unwrap();
    let score = bm25_score(&single, &["a".to_string()], "d0", DEFAULT_K1, DEFAULT_B).unwrap();
    assert!((score - 0.510_825_623_765_990_7).abs() < 1e-9, "got {score}");

    println!(
        "[PASS] bm25_suite: 1000 indexed scores equal brute force exactly; \
         single-doc case {score:.6} within 1e-9 of 0.510826"
    );
}

// ---------------------------------------------------------------------------
// Determinism suite
// ---------------------------------------------------------------------------

#[test]
fn determinism_suite() {
    use foreranker::cli::try_main;

    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let argv: Vec<String> = std::iter::once("foreranker".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        assert_eq!(try_main(&argv), 0, "subcommand failed: {args:?}");
    };
    let path = |name: &str| dir.path().join(name);
    let s = |p: &std::path::PathBuf| p.to_str().unwrap().to_string();

    let corpus = path("corpus.jsonl");
    let train_dir = path("train");
    let eval_dir = path("eval");
    let cmp_dir = path("cmp");
    let ent_dir = path("ent");

    let gen_args = ["gen-data", "--sessions", "30", "--seed", "5", "--out", &s(&corpus)];
    let train_args = [
        "train", "--corpus", &s(&corpus), "--out-dir", &s(&train_dir), "--mode", "siamese",
        "--epochs", "1", "--batch-size", "16", "--d-model", "8", "--n-layers", "1",
        "--n-heads", "2", "--d-ff", "16", "--head-hidden", "8", "--max-len", "64",
        "--seed", "5", "--precision", "f32",
    ];
    let fore = train_dir.join("foreranker.ckpt");
    let eval_args = [
        "eval", "--corpus", &s(&corpus), "--ckpt", &s(&fore), "--out-dir", &s(&eval_dir),
        "--seed", "5",
    ];
    let pq = eval_dir.join("per_query.jsonl");
    let cmp_args = ["compare", "--a", &s(&pq), "--b", &s(&pq), "--out-dir", &s(&cmp_dir)];
    let ent_args = [
        "analyze-entropy", "--corpus", &s(&corpus), "--ckpt", &s(&fore), "--out-dir",
        &s(&ent_dir), "--bins", "12",
    ];

    // First pass.
    run(&gen_args);
    run(&train_args);
    run(&eval_args);
    run(&cmp_args);
    run(&ent_args);

    let watched = [
        corpus.clone(),
        path("corpus.jsonl.manifest.json"),
        train_dir.join("foreranker.ckpt"),
        train_dir.join("future.ckpt"),
        train_dir.join("train_log.jsonl"),
        train_dir.join("manifest.json"),
        eval_dir.join("metrics.csv"),
        eval_dir.join("metrics.json"),
        eval_dir.join("per_query.jsonl"),
        eval_dir.join("manifest.json"),
        cmp_dir.join("compare.json"),
        cmp_dir.join("manifest.json"),
        ent_dir.join("entropy.csv"),
        ent_dir.join("manifest.json"),
    ];
    let snapshot: Vec<Vec<u8>> = watched.iter().map(|p| std::fs::read(p).unwrap()).collect();

    // Second pass with identical flags, seeds, and inputs.
    run(&gen_args);
    run(&train_args);
    run(&eval_args);
    run(&cmp_args);
    run(&ent_args);

    for (p, before) in watched.iter().zip(&snapshot) {
        let after = std::fs::read(p).unwrap();
        assert_eq!(&after, before, "{} changed between identical runs", p.display());
    }
    println!(
        "[PASS] determinism_suite: {} output files byte-identical across repeated runs",
        watched.len()
    );
}

// ---------------------------------------------------------------------------
// Synthetic-benefit experiment (filled in by the calibration below)
// ---------------------------------------------------------------------------


#[test]
fn synthetic_benefit_and_ablations() {
    experiment::run_synthetic_benefit();
}
