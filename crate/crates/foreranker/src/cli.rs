//! Command-line surface: `gen-data`, `train`, `eval`, `compare`, and
//! `analyze-entropy`.
//!
//! Conventions shared by every subcommand:
//!
//! - All randomness flows from one `--seed`; consumers derive labeled
//!   sub-seeds, so identical flags and inputs give byte-identical outputs.
//! - `--config` names an optional TOML or JSON file supplying defaults;
//!   explicit flags take precedence over the file.
//! - Human-readable progress goes to stderr; machine-readable artifacts only
//!   to files, written atomically (temp then rename).
//! - Every output directory gets a `manifest.json` recording the exact
//!   invocation, the seed, the resolved configuration, and format versions.
//! - Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
//!   failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::corpus::{generate_corpus, load_corpus, write_corpus, GenConfig};
use crate::encoder::{load_checkpoint_any, AnyModel, Dtype, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::eval::{
    bonferroni, entropy_distribution, evaluate, paired_t_test, EvalOptions, PerQueryMetrics,
};
use crate::trainer::{train, TrainConfig, TrainMode, TrainOutcome};

const CORPUS_SCHEMA_VERSION: u32 = 1;
const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "foreranker",
    version,
    about = "Session-aware document ranking: synthetic logs, siamese training, evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic session-log corpus.
    GenData(GenDataArgs),
    /// Train ranking models on a corpus.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a corpus.
    Eval(EvalArgs),
    /// Compare two per-query metric files with paired t-tests.
    Compare(CompareArgs),
    /// Emit normalized-entropy histograms for one or two checkpoints.
    AnalyzeEntropy(AnalyzeEntropyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliPrecision {
    F32,
    F64,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    /// Output corpus path (JSONL).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sessions: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    drift_prob: Option<f64>,
    /// Candidates per query (N).
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    click_prob: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// siamese | no-future | no-peer | no-gating
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    warmup_steps: Option<u64>,
    #[arg(long)]
    warmup_power: Option<f64>,
    /// Future-turn budget k.
    #[arg(long)]
    future_k: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    d_model: Option<usize>,
    #[arg(long)]
    n_layers: Option<usize>,
    #[arg(long)]
    n_heads: Option<usize>,
    #[arg(long)]
    d_ff: Option<usize>,
    #[arg(long)]
    head_hidden: Option<usize>,
    #[arg(long, value_enum)]
    precision: Option<CliPrecision>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluate with the history-plus-future serialization.
    #[arg(long)]
    with_future: bool,
    /// Comma-separated NDCG cutoffs.
    #[arg(long)]
    ndcg_k: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    future_k: Option<usize>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// First per-query metrics file (per_query.jsonl).
    #[arg(long)]
    a: PathBuf,
    /// Second per-query metrics file.
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bonferroni comparison count; defaults to the number of metrics.
    #[arg(long)]
    comparisons: Option<usize>,
}

#[derive(Args, Debug)]
struct AnalyzeEntropyArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    /// Optional second checkpoint for side-by-side bins.
    #[arg(long)]
    ckpt_b: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    with_future: bool,
    #[arg(long)]
    future_k: Option<usize>,
}

/// Optional defaults loaded from `--config` (TOML or JSON). Flags always win.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    seed: Option<u64>,
    sessions: Option<usize>,
    topics: Option<usize>,
    drift_prob: Option<f64>,
    candidates: Option<usize>,
    click_prob: Option<f64>,
    mode: Option<String>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    warmup_steps: Option<u64>,
    warmup_power: Option<f64>,
    future_k: Option<usize>,
    max_len: Option<usize>,
    d_model: Option<usize>,
    n_layers: Option<usize>,
    n_heads: Option<usize>,
    d_ff: Option<usize>,
    head_hidden: Option<usize>,
    precision: Option<String>,
    ndcg_k: Option<String>,
    bins: Option<usize>,
    comparisons: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            serde_json::from_str(&text).map_err(|e| {
                Error::format(format!("{}: invalid JSON config: {e}", path.display()))
            })
        } else {
            toml::from_str(&text).map_err(|e| {
                Error::format(format!("{}: invalid TOML config: {e}", path.display()))
            })
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Parse arguments and run; returns the process exit code.
pub fn try_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli, argv) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<()> {
    match cli.command {
        Command::GenData(args) => cmd_gen_data(args, argv),
        Command::Train(args) => cmd_train(args, argv),
        Command::Eval(args) => cmd_eval(args, argv),
        Command::Compare(args) => cmd_compare(args, argv),
        Command::AnalyzeEntropy(args) => cmd_analyze_entropy(args, argv),
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_gen_data(args: GenDataArgs, argv: &[String]) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = pick(args.seed, file.seed, 0);
    let defaults = GenConfig::default();
    let gen = GenConfig {
        sessions: pick(args.sessions, file.sessions, defaults.sessions),
        topics: pick(args.topics, file.topics, defaults.topics),
        drift_prob: pick(args.drift_prob, file.drift_prob, defaults.drift_prob),
        candidates_per_query: pick(args.candidates, file.candidates, defaults.candidates_per_query),
        click_prob: pick(args.click_prob, file.click_prob, defaults.click_prob),
        ..defaults
    };

    eprintln!("generating {} sessions (seed {seed})", gen.sessions);
    let sessions = generate_corpus(&gen, seed)?;
    let tmp = sibling_tmp(&args.out);
    write_corpus(&sessions, &tmp)?;
    finish_atomic(&tmp, &args.out)?;

    let manifest = json!({
        "invocation": argv,
        "seed": seed,
        "format_versions": {"corpus": CORPUS_SCHEMA_VERSION},
        "gen_config": gen,
        "sessions_written": sessions.len(),
    });
    let manifest_path = manifest_path_for(&args.out);
    write_atomic(&manifest_path, pretty(&manifest)?.as_bytes())?;
    eprintln!(
        "wrote {} sessions to {} (manifest {})",
        sessions.len(),
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs, argv: &[String]) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = pick(args.seed, file.seed, 0);
    let defaults = TrainConfig::default();
    let mode: TrainMode = pick(args.mode, file.mode, "siamese".to_string()).parse()?;
    let config = TrainConfig {
        mode,
        epochs: pick(args.epochs, file.epochs, defaults.epochs),
        batch_size: pick(args.batch_size, file.batch_size, defaults.batch_size),
        learning_rate: pick(args.learning_rate, file.learning_rate, defaults.learning_rate),
        weight_decay: pick(args.weight_decay, file.weight_decay, defaults.weight_decay),
        warmup_steps: args.warmup_steps.or(file.warmup_steps),
        warmup_power: pick(args.warmup_power, file.warmup_power, defaults.warmup_power),
        future_budget: pick(args.future_k, file.future_k, defaults.future_budget),
        seed,
        max_len: pick(args.max_len, file.max_len, defaults.max_len),
        d_model: pick(args.d_model, file.d_model, defaults.d_model),
        n_layers: pick(args.n_layers, file.n_layers, defaults.n_layers),
        n_heads: pick(args.n_heads, file.n_heads, defaults.n_heads),
        d_ff: pick(args.d_ff, file.d_ff, defaults.d_ff),
        head_hidden: pick(args.head_hidden, file.head_hidden, defaults.head_hidden),
        ..defaults
    };
    let precision = match (args.precision, file.precision.as_deref()) {
        (Some(CliPrecision::F32), _) | (None, Some("f32")) => Dtype::F32,
        (Some(CliPrecision::F64), _) | (None, Some("f64")) | (None, None) => Dtype::F64,
        (None, Some(other)) => {
            return Err(Error::input(format!(
                "unknown precision {other}; expected f32 or f64"
            )))
        }
    };

    let corpus = load_corpus(&args.corpus)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;

    eprintln!(
        "training mode {mode} on {} sessions ({precision:?}, seed {seed})",
        corpus.len()
    );
    let (report, fore_path, fut_path) = match precision {
        Dtype::F32 => finish_train(train::<f32>(&config, &corpus)?, &args.out_dir)?,
        Dtype::F64 => finish_train(train::<f64>(&config, &corpus)?, &args.out_dir)?,
    };

    if report.skipped_instances > 0 {
        eprintln!(
            "warning: skipped {} instances without a clicked positive",
            report.skipped_instances
        );
    }

    let log_path = args.out_dir.join("train_log.jsonl");
    let mut log = String::new();
    for step in &report.steps {
        log.push_str(&serde_json::to_string(step).map_err(fmt_err)?);
        log.push('\n');
    }
    write_atomic(&log_path, log.as_bytes())?;

    let manifest = json!({
        "invocation": argv,
        "seed": seed,
        "format_versions": {
            "corpus": CORPUS_SCHEMA_VERSION,
            "checkpoint": FORMAT_VERSION,
        },
        "train_config": config,
        "precision": precision,
        "steps": report.steps.len(),
        "skipped_instances": report.skipped_instances,
        "mean_alpha": report.mean_alpha,
        "foreranker_checkpoint": fore_path,
        "future_checkpoint": fut_path,
        "train_log": log_path,
    });
    write_atomic(
        &args.out_dir.join("manifest.json"),
        pretty(&manifest)?.as_bytes(),
    )?;
    eprintln!("finished {} steps; artifacts in {}", report.steps.len(), args.out_dir.display());
    Ok(())
}

fn finish_train<F: crate::encoder::Real>(
    outcome: TrainOutcome<F>,
    out_dir: &Path,
) -> Result<(crate::trainer::TrainReport, PathBuf, Option<PathBuf>)> {
    let (fore, fut) = outcome.save_checkpoints(out_dir)?;
    Ok((outcome.report, fore, fut))
}

fn cmd_eval(args: EvalArgs, argv: &[String]) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = pick(args.seed, file.seed, 0);
    let ndcg_spec = pick(args.ndcg_k, file.ndcg_k, "1,3,5,10".to_string());
    let opts = EvalOptions {
        ndcg_ks: parse_ks(&ndcg_spec)?,
        entropy_bins: pick(args.bins, file.bins, 10),
        with_future: args.with_future,
        future_budget: pick(args.future_k, file.future_k, 2),
        seed,
    };

    let corpus = load_corpus(&args.corpus)?;
    let model = load_checkpoint_any(&args.ckpt)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;

    eprintln!(
        "evaluating {} on {} sessions (with_future={})",
        args.ckpt.display(),
        corpus.len(),
        opts.with_future
    );
    let (report, per_query) = evaluate(model.as_scorer(), &corpus, &opts)?;

    write_atomic(
        &args.out_dir.join("metrics.csv"),
        report.to_csv().as_bytes(),
    )?;
    write_atomic(
        &args.out_dir.join("metrics.json"),
        pretty(&serde_json::to_value(&report).map_err(fmt_err)?)?.as_bytes(),
    )?;
    let mut pq = String::new();
    for row in &per_query {
        pq.push_str(&serde_json::to_string(row).map_err(fmt_err)?);
        pq.push('\n');
    }
    write_atomic(&args.out_dir.join("per_query.jsonl"), pq.as_bytes())?;

    let manifest = json!({
        "invocation": argv,
        "seed": seed,
        "format_versions": {
            "corpus": CORPUS_SCHEMA_VERSION,
            "checkpoint": FORMAT_VERSION,
            "report": REPORT_SCHEMA_VERSION,
        },
        "checkpoint": args.ckpt,
        "checkpoint_dtype": model.dtype(),
        "with_future": opts.with_future,
        "ndcg_k": opts.ndcg_ks,
        "entropy_bins": opts.entropy_bins,
        "future_k": opts.future_budget,
        "evaluated_queries": report.evaluated_queries,
        "skipped_no_relevant": report.skipped_no_relevant,
    });
    write_atomic(
        &args.out_dir.join("manifest.json"),
        pretty(&manifest)?.as_bytes(),
    )?;
    eprintln!(
        "map {:.4} mrr {:.4} over {} queries; outputs in {}",
        report.overall.map,
        report.overall.mrr,
        report.evaluated_queries,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs, argv: &[String]) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = pick(args.seed, file.seed, 0);
    let rows_a = read_per_query(&args.a)?;
    let rows_b = read_per_query(&args.b)?;

    let keys_a: Vec<&str> = rows_a.iter().map(|r| r.query_key.as_str()).collect();
    let keys_b: Vec<&str> = rows_b.iter().map(|r| r.query_key.as_str()).collect();
    if keys_a != keys_b {
        let set_a: std::collections::BTreeSet<&str> = keys_a.iter().copied().collect();
        let set_b: std::collections::BTreeSet<&str> = keys_b.iter().copied().collect();
        let only_a: Vec<&str> = set_a.difference(&set_b).copied().take(20).collect();
        let only_b: Vec<&str> = set_b.difference(&set_a).copied().take(20).collect();
        return Err(Error::format(format!(
            "query keys diverge: {} only in {} (e.g. {:?}), {} only in {} (e.g. {:?})",
            set_a.difference(&set_b).count(),
            args.a.display(),
            only_a,
            set_b.difference(&set_a).count(),
            args.b.display(),
            only_b,
        )));
    }

    // Metric name → aligned samples.
    let mut metrics: Vec<(String, Vec<f64>, Vec<f64>)> = vec![
        (
            "map".into(),
            rows_a.iter().map(|r| r.ap).collect(),
            rows_b.iter().map(|r| r.ap).collect(),
        ),
        (
            "mrr".into(),
            rows_a.iter().map(|r| r.rr).collect(),
            rows_b.iter().map(|r| r.rr).collect(),
        ),
    ];
    for (i, &(k, _)) in rows_a[0].ndcg.iter().enumerate() {
        metrics.push((
            format!("ndcg@{k}"),
            rows_a.iter().map(|r| r.ndcg[i].1).collect(),
            rows_b.iter().map(|r| r.ndcg[i].1).collect(),
        ));
    }
    let comparisons = pick(args.comparisons, file.comparisons, metrics.len());

    let mut results = BTreeMap::new();
    for (name, a, b) in &metrics {
        let t = paired_t_test(a, b)?;
        let mean_a = a.iter().sum::<f64>() / a.len() as f64;
        let mean_b = b.iter().sum::<f64>() / b.len() as f64;
        results.insert(
            name.clone(),
            json!({
                "t_stat": t.t_stat,
                "p_raw": t.p_value,
                "p_corrected": bonferroni(t.p_value, comparisons),
                "degenerate": t.degenerate,
                "mean_a": mean_a,
                "mean_b": mean_b,
                "mean_diff": t.mean_diff,
            }),
        );
    }

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;
    let report = json!({
        "query_count": rows_a.len(),
        "comparisons": comparisons,
        "metrics": results,
    });
    write_atomic(
        &args.out_dir.join("compare.json"),
        pretty(&report)?.as_bytes(),
    )?;
    let manifest = json!({
        "invocation": argv,
        "seed": seed,
        "format_versions": {"report": REPORT_SCHEMA_VERSION},
        "a": args.a,
        "b": args.b,
        "comparisons": comparisons,
    });
    write_atomic(
        &args.out_dir.join("manifest.json"),
        pretty(&manifest)?.as_bytes(),
    )?;
    eprintln!(
        "compared {} queries over {} metrics; report in {}",
        rows_a.len(),
        metrics.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_analyze_entropy(args: AnalyzeEntropyArgs, argv: &[String]) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let seed = pick(args.seed, file.seed, 0);
    let bins = pick(args.bins, file.bins, 10);
    let future_budget = pick(args.future_k, file.future_k, 2);

    let corpus = load_corpus(&args.corpus)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;

    let analyze = |ckpt: &Path| -> Result<crate::eval::EntropyHistogram> {
        let model: AnyModel = load_checkpoint_any(ckpt)?;
        entropy_distribution(
            model.as_scorer(),
            &corpus,
            bins,
            args.with_future,
            future_budget,
        )
    };

    let hist = analyze(&args.ckpt)?;
    write_atomic(&args.out_dir.join("entropy.csv"), hist.to_csv().as_bytes())?;
    let hist_b = match &args.ckpt_b {
        Some(ckpt_b) => {
            let h = analyze(ckpt_b)?;
            write_atomic(&args.out_dir.join("entropy_b.csv"), h.to_csv().as_bytes())?;
            Some(h)
        }
        None => None,
    };

    let manifest = json!({
        "invocation": argv,
        "seed": seed,
        "format_versions": {
            "corpus": CORPUS_SCHEMA_VERSION,
            "checkpoint": FORMAT_VERSION,
            "report": REPORT_SCHEMA_VERSION,
        },
        "checkpoint": args.ckpt,
        "checkpoint_b": args.ckpt_b,
        "bins": bins,
        "with_future": args.with_future,
        "mean_normalized_entropy": hist.mean_normalized_entropy,
        "mean_normalized_entropy_b": hist_b.as_ref().map(|h| h.mean_normalized_entropy),
    });
    write_atomic(
        &args.out_dir.join("manifest.json"),
        pretty(&manifest)?.as_bytes(),
    )?;
    eprintln!(
        "entropy histogram over {} queries written to {}",
        hist.total(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn parse_ks(spec: &str) -> Result<Vec<usize>> {
    let ks: Result<Vec<usize>> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad NDCG cutoff {s:?}")))
        })
        .collect();
    let ks = ks?;
    if ks.is_empty() || ks.iter().any(|&k| k == 0) {
        return Err(Error::input("NDCG cutoffs must be positive integers"));
    }
    Ok(ks)
}

fn read_per_query(path: &Path) -> Result<Vec<PerQueryMetrics>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: PerQueryMetrics = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("{}: {e}", path.display()),
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format(format!(
            "{}: no per-query records",
            path.display()
        )));
    }
    Ok(rows)
}

fn manifest_path_for(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

fn sibling_tmp(path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.tmp", path.display()))
}

/// Write-temp-then-rename so partial files never land at the final path.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = sibling_tmp(path);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    finish_atomic(&tmp, path)
}

fn finish_atomic(tmp: &Path, path: &Path) -> Result<()> {
    std::fs::rename(tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn pretty(value: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(fmt_err)?;
    s.push('\n');
    Ok(s)
}

fn fmt_err(e: serde_json::Error) -> Error {
    Error::format(format!("JSON encoding failed: {e}"))
}
