//! End-to-end runs of every subcommand through the in-process entry point,
//! plus exit-code checks against the real binary.

use std::path::Path;
use std::process::Command;

use foreranker::cli::try_main;

fn run(args: &[&str]) -> i32 {
    let argv: Vec<String> = std::iter::once("foreranker".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    try_main(&argv)
}

fn gen_corpus(dir: &Path, sessions: usize, seed: u64) -> std::path::PathBuf {
    let out = dir.join("corpus.jsonl");
    let code = run(&[
        "gen-data",
        "--sessions",
        &sessions.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    out
}

fn train_tiny(dir: &Path, corpus: &Path, mode: &str, run_name: &str) -> std::path::PathBuf {
    let out_dir = dir.join(run_name);
    let code = run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--mode",
        mode,
        "--epochs",
        "1",
        "--batch-size",
        "16",
        "--d-model",
        "8",
        "--n-layers",
        "1",
        "--n-heads",
        "2",
        "--d-ff",
        "16",
        "--head-hidden",
        "8",
        "--max-len",
        "64",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0, "train {mode} failed");
    out_dir
}

#[test]
fn gen_data_writes_corpus_and_manifest_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_corpus(dir.path(), 40, 7);
    let manifest = dir.path().join("corpus.jsonl.manifest.json");
    assert!(manifest.exists());
    let manifest_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(manifest_json["seed"], 7);
    assert_eq!(manifest_json["sessions_written"], 40);
    assert!(manifest_json["invocation"].as_array().unwrap().len() >= 6);

    let sessions = foreranker::corpus::load_corpus(&a).unwrap();
    assert_eq!(sessions.len(), 40);

    // Same flags, second run: byte-identical file.
    let dir2 = tempfile::tempdir().unwrap();
    let b = gen_corpus(dir2.path(), 40, 7);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let dir3 = tempfile::tempdir().unwrap();
    let c = gen_corpus(dir3.path(), 40, 8);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn train_emits_checkpoints_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 30, 11);

    let nf = train_tiny(dir.path(), &corpus, "no-future", "nf");
    assert!(nf.join("foreranker.ckpt").exists());
    assert!(!nf.join("future.ckpt").exists(), "no-future must not emit a future twin");
    assert!(nf.join("train_log.jsonl").exists());
    assert!(nf.join("manifest.json").exists());

    let si = train_tiny(dir.path(), &corpus, "siamese", "si");
    assert!(si.join("foreranker.ckpt").exists());
    assert!(si.join("future.ckpt").exists());

    // Step log carries the fixed record shape.
    let log = std::fs::read_to_string(si.join("train_log.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for key in ["step", "loss_f", "loss_h", "nll_f", "nll_h", "kl_f", "kl_h", "alpha_rate", "omega"]
    {
        assert!(first.get(key).is_some(), "missing key {key}");
    }

    // Identical flags and seed give identical checkpoints.
    let si2 = train_tiny(dir.path(), &corpus, "siamese", "si2");
    assert_eq!(
        std::fs::read(si.join("foreranker.ckpt")).unwrap(),
        std::fs::read(si2.join("foreranker.ckpt")).unwrap()
    );

    assert_eq!(
        run(&["train", "--corpus", corpus.to_str().unwrap(), "--out-dir",
              dir.path().join("bad").to_str().unwrap(), "--mode", "bogus"]),
        1,
        "unknown mode is a usage error"
    );
}

#[test]
fn eval_writes_reports_and_flags_work() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 30, 13);
    let si = train_tiny(dir.path(), &corpus, "siamese", "si");

    let eval_dir = dir.path().join("eval");
    let code = run(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--ckpt",
        si.join("foreranker.ckpt").to_str().unwrap(),
        "--out-dir",
        eval_dir.to_str().unwrap(),
        "--ndcg-k",
        "1,3,5,10",
        "--seed",
        "5",
    ]);
    assert_eq!(code, 0);

    let csv = std::fs::read_to_string(eval_dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("metric,overall,short,medium,long\n"));
    let metric_names: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(metric_names, vec!["map", "mrr", "ndcg@1", "ndcg@3", "ndcg@5", "ndcg@10"]);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(eval_dir.join("metrics.json")).unwrap())
            .unwrap();
    assert!(report["overall"]["map"].as_f64().unwrap() >= 0.0);
    assert!(report["baseline_random"]["map"].as_f64().unwrap() > 0.0);
    assert!(eval_dir.join("per_query.jsonl").exists());
    assert!(eval_dir.join("manifest.json").exists());

    // The future twin evaluates with the future-aware serialization.
    let eval_fut = dir.path().join("eval_fut");
    let code = run(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--ckpt",
        si.join("future.ckpt").to_str().unwrap(),
        "--out-dir",
        eval_fut.to_str().unwrap(),
        "--with-future",
    ]);
    assert_eq!(code, 0);

    // Missing checkpoint: explicit data error.
    let code = run(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--ckpt",
        dir.path().join("nope.ckpt").to_str().unwrap(),
        "--out-dir",
        dir.path().join("eval2").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn eval_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 25, 17);
    let si = train_tiny(dir.path(), &corpus, "no-future", "nf");
    let mut outputs = Vec::new();
    for name in ["e1", "e2"] {
        let eval_dir = dir.path().join(name);
        let code = run(&[
            "eval",
            "--corpus",
            corpus.to_str().unwrap(),
            "--ckpt",
            si.join("foreranker.ckpt").to_str().unwrap(),
            "--out-dir",
            eval_dir.to_str().unwrap(),
            "--seed",
            "9",
        ]);
        assert_eq!(code, 0);
        outputs.push((
            std::fs::read(eval_dir.join("metrics.json")).unwrap(),
            std::fs::read(eval_dir.join("metrics.csv")).unwrap(),
            std::fs::read(eval_dir.join("per_query.jsonl")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn compare_self_is_p_one_and_key_mismatch_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 30, 19);
    let nf = train_tiny(dir.path(), &corpus, "no-future", "nf");
    let eval_dir = dir.path().join("eval");
    assert_eq!(
        run(&[
            "eval",
            "--corpus",
            corpus.to_str().unwrap(),
            "--ckpt",
            nf.join("foreranker.ckpt").to_str().unwrap(),
            "--out-dir",
            eval_dir.to_str().unwrap(),
        ]),
        0
    );
    let pq = eval_dir.join("per_query.jsonl");

    let cmp_dir = dir.path().join("cmp");
    assert_eq!(
        run(&[
            "compare",
            "--a",
            pq.to_str().unwrap(),
            "--b",
            pq.to_str().unwrap(),
            "--out-dir",
            cmp_dir.to_str().unwrap(),
        ]),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cmp_dir.join("compare.json")).unwrap())
            .unwrap();
    for (_, metric) in report["metrics"].as_object().unwrap() {
        assert_eq!(metric["p_raw"].as_f64().unwrap(), 1.0);
        assert_eq!(metric["p_corrected"].as_f64().unwrap(), 1.0);
        assert!(metric.get("t_stat").is_some());
    }

    // Truncate one file: key sets diverge, explicit error, exit 2.
    let truncated = dir.path().join("short.jsonl");
    let text = std::fs::read_to_string(&pq).unwrap();
    let keep: Vec<&str> = text.lines().take(3).collect();
    std::fs::write(&truncated, keep.join("\n")).unwrap();
    assert_eq!(
        run(&[
            "compare",
            "--a",
            pq.to_str().unwrap(),
            "--b",
            truncated.to_str().unwrap(),
            "--out-dir",
            dir.path().join("cmp2").to_str().unwrap(),
        ]),
        2
    );
}

#[test]
fn analyze_entropy_bins_and_zero_head() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 25, 23);
    let si = train_tiny(dir.path(), &corpus, "siamese", "si");

    // A zero scoring head predicts uniform distributions: all mass lands in
    // the top bin.
    let sessions = foreranker::corpus::load_corpus(&corpus).unwrap();
    let vocab = foreranker::encoder::Vocabulary::from_corpus(&sessions);
    let arch = foreranker::encoder::ArchConfig {
        vocab_size: vocab.len(),
        max_len: 64,
        d_model: 8,
        n_layers: 1,
        n_heads: 2,
        d_ff: 16,
        head_hidden: 8,
    };
    let mut params = foreranker::encoder::init_params::<f64>(&arch, 1).unwrap();
    params.head.w_out.fill(0.0);
    params.head.b_out.fill(0.0);
    let zero_ckpt = dir.path().join("zero.ckpt");
    foreranker::encoder::save_checkpoint(&params, &vocab, &zero_ckpt).unwrap();

    let ent_dir = dir.path().join("ent");
    let code = run(&[
        "analyze-entropy",
        "--corpus",
        corpus.to_str().unwrap(),
        "--ckpt",
        zero_ckpt.to_str().unwrap(),
        "--ckpt-b",
        si.join("foreranker.ckpt").to_str().unwrap(),
        "--out-dir",
        ent_dir.to_str().unwrap(),
        "--bins",
        "20",
    ]);
    assert_eq!(code, 0);

    let csv = std::fs::read_to_string(ent_dir.join("entropy.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "bin_low,bin_high,count");
    assert_eq!(rows.len(), 21, "--bins 20 gives 20 rows");
    let counts: Vec<u64> = rows[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let total: u64 = counts.iter().sum();
    let turns: u64 = sessions.iter().map(|s| s.turns.len() as u64).sum();
    assert_eq!(total, turns, "bin counts sum to evaluated queries");
    assert_eq!(counts[19], total, "uniform predictions fill the top bin");
    assert!(ent_dir.join("entropy_b.csv").exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, "sessions = 12\nseed = 31\n").unwrap();

    // File supplies both values.
    let out_a = dir.path().join("a.jsonl");
    assert_eq!(
        run(&["gen-data", "--config", config.to_str().unwrap(), "--out", out_a.to_str().unwrap()]),
        0
    );
    assert_eq!(foreranker::corpus::load_corpus(&out_a).unwrap().len(), 12);

    // Flag overrides the file's session count; seed still comes from file.
    let out_b = dir.path().join("b.jsonl");
    assert_eq!(
        run(&[
            "gen-data",
            "--config",
            config.to_str().unwrap(),
            "--sessions",
            "8",
            "--out",
            out_b.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(foreranker::corpus::load_corpus(&out_b).unwrap().len(), 8);

    // JSON config works the same way.
    let json_config = dir.path().join("exp.json");
    std::fs::write(&json_config, "{\"sessions\": 5}").unwrap();
    let out_c = dir.path().join("c.jsonl");
    assert_eq!(
        run(&["gen-data", "--config", json_config.to_str().unwrap(), "--out", out_c.to_str().unwrap()]),
        0
    );
    assert_eq!(foreranker::corpus::load_corpus(&out_c).unwrap().len(), 5);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_foreranker");

    // Missing required --out: usage error, exit 1.
    let out = Command::new(bin)
        .args(["gen-data", "--sessions", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Unknown subcommand: usage error.
    let out = Command::new(bin).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Unreadable corpus: data error, exit 2.
    let out = Command::new(bin)
        .args(["train", "--corpus", "/nonexistent.jsonl", "--out-dir", "/tmp/x-train-err"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Help exits 0.
    let out = Command::new(bin).args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["gen-data", "train", "eval", "compare", "analyze-entropy"] {
        assert!(text.contains(sub), "help must list {sub}");
    }
}

#[test]
fn malformed_corpus_is_a_data_error_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"session_id\": \"s0\"}\n").unwrap();
    let code = run(&[
        "train",
        "--corpus",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}
