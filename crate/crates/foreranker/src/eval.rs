//! Ranking metrics, session-length and query-position breakdowns, entropy
//! analysis, and paired significance testing.
//!
//! Metric conventions: binary relevance from click labels; queries with no
//! relevant candidate are excluded from every mean (and counted); ties in
//! model scores are broken by ascending doc_id so evaluation is a total
//! order. Sessions bucket as short (2 queries), medium (3-4), long (5+);
//! single-query sessions are excluded from the bucket tables with a count.
//! Empty position cells are omitted, never reported as zero.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{ranking_instances, RankingInstance, Session};
use crate::encoder::TurnScorer;
use crate::error::{Error, Result};
use crate::objectives::{entropy, softmax_scores};
use crate::seeding::rng_for;

/// One query's ranked candidates with binary relevance.
#[derive(Debug, Clone)]
pub struct RankedResult {
    pub query_key: String,
    /// `(doc_id, score)` sorted by score descending, doc_id ascending.
    pub ranked: Vec<(String, f64)>,
    /// Relevance aligned with `ranked`.
    pub relevance: Vec<bool>,
}

impl RankedResult {
    /// Rank candidates by `(score desc, doc_id asc)`.
    pub fn from_scores(
        query_key: impl Into<String>,
        doc_ids: &[String],
        scores: &[f64],
        relevant: &[bool],
    ) -> Result<Self> {
        if doc_ids.is_empty() || doc_ids.len() != scores.len() || doc_ids.len() != relevant.len() {
            return Err(Error::input(
                "ranked result needs equal-length, non-empty doc/score/relevance lists",
            ));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::numeric("ranking scores must be finite"));
        }
        let mut order: Vec<usize> = (0..doc_ids.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .expect("finite scores")
                .then_with(|| doc_ids[a].cmp(&doc_ids[b]))
        });
        Ok(RankedResult {
            query_key: query_key.into(),
            ranked: order
                .iter()
                .map(|&i| (doc_ids[i].clone(), scores[i]))
                .collect(),
            relevance: order.iter().map(|&i| relevant[i]).collect(),
        })
    }

    pub fn num_relevant(&self) -> usize {
        self.relevance.iter().filter(|&&r| r).count()
    }
}

/// Average precision; `None` when the query has no relevant candidate.
pub fn average_precision(result: &RankedResult) -> Option<f64> {
    ap_of(&result.relevance)
}

/// Reciprocal rank of the first relevant candidate.
pub fn reciprocal_rank(result: &RankedResult) -> Option<f64> {
    rr_of(&result.relevance)
}

/// Binary NDCG at cutoff `k`.
pub fn ndcg_at_k(result: &RankedResult, k: usize) -> Option<f64> {
    ndcg_of(&result.relevance, k)
}

pub(crate) fn ap_of(rels: &[bool]) -> Option<f64> {
    let total = rels.iter().filter(|&&r| r).count();
    if total == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in rels.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

pub(crate) fn rr_of(rels: &[bool]) -> Option<f64> {
    rels.iter()
        .position(|&r| r)
        .map(|rank| 1.0 / (rank + 1) as f64)
}

pub(crate) fn ndcg_of(rels: &[bool], k: usize) -> Option<f64> {
    let total = rels.iter().filter(|&&r| r).count();
    if total == 0 || k == 0 {
        return None;
    }
    let dcg: f64 = rels
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..total.min(k))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    Some(dcg / ideal)
}

// ---------------------------------------------------------------------------
// Buckets and positions
// ---------------------------------------------------------------------------

/// Session-length bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Short,
    Medium,
    Long,
}

impl Bucket {
    /// Bucket of a session with `len` queries; single-query sessions have no
    /// bucket.
    pub fn of_session_len(len: usize) -> Option<Bucket> {
        match len {
            0 | 1 => None,
            2 => Some(Bucket::Short),
            3 | 4 => Some(Bucket::Medium),
            _ => Some(Bucket::Long),
        }
    }

    /// Highest reported query position for this bucket; deeper positions pool
    /// into the last cell.
    pub fn position_cap(self) -> usize {
        match self {
            Bucket::Short => 2,
            Bucket::Medium => 4,
            Bucket::Long => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bucket::Short => "short",
            Bucket::Medium => "medium",
            Bucket::Long => "long",
        }
    }
}

/// Sessions split by length bucket, with the single-query exclusion count.
#[derive(Debug, Clone)]
pub struct BucketSplit<'a> {
    pub short: Vec<&'a Session>,
    pub medium: Vec<&'a Session>,
    pub long: Vec<&'a Session>,
    pub excluded_single_query: usize,
}

pub fn bucket_by_session_length(sessions: &[Session]) -> BucketSplit<'_> {
    let mut split = BucketSplit {
        short: Vec::new(),
        medium: Vec::new(),
        long: Vec::new(),
        excluded_single_query: 0,
    };
    for s in sessions {
        match Bucket::of_session_len(s.turns.len()) {
            Some(Bucket::Short) => split.short.push(s),
            Some(Bucket::Medium) => split.medium.push(s),
            Some(Bucket::Long) => split.long.push(s),
            None => split.excluded_single_query += 1,
        }
    }
    split
}

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// MAP, MRR, and NDCG at each requested cutoff.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricSummary {
    pub map: f64,
    pub mrr: f64,
    /// `(k, value)` pairs in ascending `k`.
    pub ndcg: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketMetrics {
    pub query_count: usize,
    #[serde(flatten)]
    pub metrics: MetricSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionCell {
    pub position: usize,
    pub query_count: usize,
    #[serde(flatten)]
    pub metrics: MetricSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean_normalized_entropy: f64,
}

impl EntropyHistogram {
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::input("histogram needs at least one bin"));
        }
        let mut counts = vec![0usize; bins];
        for &v in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::numeric(format!(
                    "normalized entropy {v} outside [0, 1]"
                )));
            }
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        Ok(EntropyHistogram {
            bin_edges: edges,
            counts,
            mean_normalized_entropy: mean,
        })
    }

    /// CSV rows `bin_low,bin_high,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (i, &c) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{c}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1]
            ));
        }
        out
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Per-query metric record, one JSONL line in `per_query.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerQueryMetrics {
    pub query_key: String,
    pub session_len: usize,
    /// 1-based query position within its session.
    pub position: usize,
    pub bucket: Option<Bucket>,
    pub candidate_count: usize,
    pub ap: f64,
    pub rr: f64,
    pub ndcg: Vec<(usize, f64)>,
    pub normalized_entropy: f64,
}

/// The full evaluation report mirrored into `metrics.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub overall: MetricSummary,
    pub evaluated_queries: usize,
    pub skipped_no_relevant: usize,
    pub excluded_single_query_sessions: usize,
    /// Buckets with at least one evaluated query.
    pub buckets: BTreeMap<Bucket, BucketMetrics>,
    /// Populated `(bucket, position)` cells only.
    pub positions: BTreeMap<Bucket, Vec<PositionCell>>,
    pub entropy: EntropyHistogram,
    /// The same queries ranked by a seeded random shuffle.
    pub baseline_random: MetricSummary,
    pub seed: u64,
    pub with_future: bool,
}

impl MetricsReport {
    /// CSV with the fixed header `metric,overall,short,medium,long`; empty
    /// cells where a bucket has no queries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,overall,short,medium,long\n");
        let bucket_val = |b: Bucket, pick: &dyn Fn(&MetricSummary) -> f64| -> String {
            self.buckets
                .get(&b)
                .map(|m| pick(&m.metrics).to_string())
                .unwrap_or_default()
        };
        let mut row = |name: &str, pick: &dyn Fn(&MetricSummary) -> f64| {
            out.push_str(&format!(
                "{name},{},{},{},{}\n",
                pick(&self.overall),
                bucket_val(Bucket::Short, pick),
                bucket_val(Bucket::Medium, pick),
                bucket_val(Bucket::Long, pick),
            ));
        };
        row("map", &|m| m.map);
        row("mrr", &|m| m.mrr);
        for (i, &(k, _)) in self.overall.ndcg.iter().enumerate() {
            row(&format!("ndcg@{k}"), &move |m| m.ndcg[i].1);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Evaluation pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub ndcg_ks: Vec<usize>,
    pub entropy_bins: usize,
    /// Score with the history-plus-future serialization.
    pub with_future: bool,
    pub future_budget: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ndcg_ks: vec![1, 3, 5, 10],
            entropy_bins: 10,
            with_future: false,
            future_budget: 2,
            seed: 0,
        }
    }
}

fn summarize(rows: &[PerQueryMetrics], ks: &[usize]) -> MetricSummary {
    let n = rows.len() as f64;
    if rows.is_empty() {
        return MetricSummary {
            map: 0.0,
            mrr: 0.0,
            ndcg: ks.iter().map(|&k| (k, 0.0)).collect(),
        };
    }
    MetricSummary {
        map: rows.iter().map(|r| r.ap).sum::<f64>() / n,
        mrr: rows.iter().map(|r| r.rr).sum::<f64>() / n,
        ndcg: ks
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, rows.iter().map(|r| r.ndcg[i].1).sum::<f64>() / n))
            .collect(),
    }
}

/// Evaluate a model over every turn of `sessions`.
pub fn evaluate(
    scorer: &dyn TurnScorer,
    sessions: &[Session],
    opts: &EvalOptions,
) -> Result<(MetricsReport, Vec<PerQueryMetrics>)> {
    if opts.ndcg_ks.is_empty() || opts.ndcg_ks.iter().any(|&k| k == 0) {
        return Err(Error::input("ndcg cutoffs must be positive"));
    }
    let instances = ranking_instances(sessions, opts.future_budget);
    let scored: Result<Vec<Option<(PerQueryMetrics, PerQueryMetrics)>>> = instances
        .par_iter()
        .map(|inst| evaluate_instance(scorer, inst, opts))
        .collect();
    let scored = scored?;

    let mut rows = Vec::new();
    let mut baseline_rows = Vec::new();
    let mut skipped = 0usize;
    for entry in scored {
        match entry {
            Some((row, baseline)) => {
                rows.push(row);
                baseline_rows.push(baseline);
            }
            None => skipped += 1,
        }
    }

    let overall = summarize(&rows, &opts.ndcg_ks);
    let baseline_random = summarize(&baseline_rows, &opts.ndcg_ks);

    let mut buckets = BTreeMap::new();
    let mut positions: BTreeMap<Bucket, Vec<PositionCell>> = BTreeMap::new();
    for bucket in [Bucket::Short, Bucket::Medium, Bucket::Long] {
        let in_bucket: Vec<PerQueryMetrics> = rows
            .iter()
            .filter(|r| r.bucket == Some(bucket))
            .cloned()
            .collect();
        if in_bucket.is_empty() {
            continue;
        }
        buckets.insert(
            bucket,
            BucketMetrics {
                query_count: in_bucket.len(),
                metrics: summarize(&in_bucket, &opts.ndcg_ks),
            },
        );
        let mut cells = Vec::new();
        for pos in 1..=bucket.position_cap() {
            let cell_rows: Vec<PerQueryMetrics> = in_bucket
                .iter()
                .filter(|r| r.position.min(bucket.position_cap()) == pos)
                .cloned()
                .collect();
            if cell_rows.is_empty() {
                continue;
            }
            cells.push(PositionCell {
                position: pos,
                query_count: cell_rows.len(),
                metrics: summarize(&cell_rows, &opts.ndcg_ks),
            });
        }
        positions.insert(bucket, cells);
    }

    let entropy_values: Vec<f64> = rows
        .iter()
        .filter(|r| r.candidate_count >= 2)
        .map(|r| r.normalized_entropy)
        .collect();
    let entropy = EntropyHistogram::from_values(&entropy_values, opts.entropy_bins)?;

    let excluded_single = sessions.iter().filter(|s| s.turns.len() == 1).count();
    let report = MetricsReport {
        overall,
        evaluated_queries: rows.len(),
        skipped_no_relevant: skipped,
        excluded_single_query_sessions: excluded_single,
        buckets,
        positions,
        entropy,
        baseline_random,
        seed: opts.seed,
        with_future: opts.with_future,
    };
    Ok((report, rows))
}

fn evaluate_instance(
    scorer: &dyn TurnScorer,
    inst: &RankingInstance,
    opts: &EvalOptions,
) -> Result<Option<(PerQueryMetrics, PerQueryMetrics)>> {
    let relevant: Vec<bool> = inst.candidates.iter().map(|d| d.clicked).collect();
    if !relevant.iter().any(|&r| r) {
        return Ok(None);
    }
    let future = opts.with_future.then_some(&inst.future);
    let scores = scorer.score_turn(&inst.history, &inst.query, &inst.candidates, future)?;
    let doc_ids: Vec<String> = inst.candidates.iter().map(|d| d.doc_id.clone()).collect();
    let key = inst.query_key();
    let result = RankedResult::from_scores(key.clone(), &doc_ids, &scores, &relevant)?;

    let norm_entropy = if scores.len() >= 2 {
        entropy(&softmax_scores(&scores)?, true)
    } else {
        0.0
    };
    let row = per_query_row(inst, &result, norm_entropy, &opts.ndcg_ks);

    // Random-ranking baseline: a seeded shuffle of the same candidates.
    let mut order: Vec<usize> = (0..doc_ids.len()).collect();
    {
        use rand::seq::SliceRandom;
        let mut rng = rng_for(opts.seed, &format!("shuffle-baseline/{key}"));
        order.shuffle(&mut rng);
    }
    let shuffled_scores: Vec<f64> = {
        let mut s = vec![0.0; order.len()];
        for (rank, &i) in order.iter().enumerate() {
            s[i] = (order.len() - rank) as f64;
        }
        s
    };
    let baseline = RankedResult::from_scores(key, &doc_ids, &shuffled_scores, &relevant)?;
    let baseline_row = per_query_row(inst, &baseline, 1.0, &opts.ndcg_ks);

    Ok(Some((row, baseline_row)))
}

fn per_query_row(
    inst: &RankingInstance,
    result: &RankedResult,
    norm_entropy: f64,
    ks: &[usize],
) -> PerQueryMetrics {
    PerQueryMetrics {
        query_key: result.query_key.clone(),
        session_len: inst.session_len,
        position: inst.turn_index + 1,
        bucket: Bucket::of_session_len(inst.session_len),
        candidate_count: inst.candidates.len(),
        ap: average_precision(result).expect("caller checked relevance"),
        rr: reciprocal_rank(result).expect("caller checked relevance"),
        ndcg: ks
            .iter()
            .map(|&k| (k, ndcg_at_k(result, k).expect("caller checked relevance")))
            .collect(),
        normalized_entropy: norm_entropy,
    }
}

/// Normalized-entropy histogram of a model's predictions over an eval set.
pub fn entropy_distribution(
    scorer: &dyn TurnScorer,
    sessions: &[Session],
    bins: usize,
    with_future: bool,
    future_budget: usize,
) -> Result<EntropyHistogram> {
    let instances = ranking_instances(sessions, future_budget);
    let values: Result<Vec<Option<f64>>> = instances
        .par_iter()
        .map(|inst| {
            if inst.candidates.len() < 2 {
                return Ok(None);
            }
            let future = with_future.then_some(&inst.future);
            let scores =
                scorer.score_turn(&inst.history, &inst.query, &inst.candidates, future)?;
            Ok(Some(entropy(&softmax_scores(&scores)?, true)))
        })
        .collect();
    let values: Vec<f64> = values?.into_iter().flatten().collect();
    EntropyHistogram::from_values(&values, bins)
}

// ---------------------------------------------------------------------------
// Significance testing
// ---------------------------------------------------------------------------

/// Paired two-sided Student's t-test result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub p_value: f64,
    pub mean_diff: f64,
    pub n: usize,
    /// Set when the differences have zero variance around a nonzero mean.
    pub degenerate: bool,
}

/// Two-sided paired t-test on aligned samples.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::input("paired t-test needs at least 2 pairs"));
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);

    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TTestResult {
                t_stat: 0.0,
                p_value: 1.0,
                mean_diff: 0.0,
                n,
                degenerate: false,
            }
        } else {
            TTestResult {
                t_stat: if mean > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
                p_value: 0.0,
                mean_diff: mean,
                n,
                degenerate: true,
            }
        });
    }

    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::numeric(format!("t distribution: {e}")))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(TTestResult {
        t_stat: t,
        p_value: p.clamp(0.0, 1.0),
        mean_diff: mean,
        n,
        degenerate: false,
    })
}

/// Bonferroni correction: `p × comparisons`, capped at 1.
pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons.max(1) as f64).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn result_from_rels(rels: &[bool]) -> RankedResult {
        let n = rels.len();
        let doc_ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let scores: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        RankedResult::from_scores("q", &doc_ids, &scores, rels).unwrap()
    }

    #[test]
    fn ranked_result_sorts_by_score_then_doc_id() {
        let doc_ids: Vec<String> = ["db", "da", "dc"].iter().map(|s| s.to_string()).collect();
        let scores = [1.0, 1.0, 5.0];
        let rels = [false, true, false];
        let r = RankedResult::from_scores("q", &doc_ids, &scores, &rels).unwrap();
        let order: Vec<&str> = r.ranked.iter().map(|(d, _)| d.as_str()).collect();
        assert_eq!(order, vec!["dc", "da", "db"]);
        assert_eq!(r.relevance, vec![false, true, false]);
    }

    #[test]
    fn ap_hand_cases() {
        assert_eq!(average_precision(&result_from_rels(&[true, false, false])), Some(1.0));
        let r = result_from_rels(&[true, false, true, false, false]);
        assert_abs_diff_eq!(
            average_precision(&r).unwrap(),
            (1.0 + 2.0 / 3.0) / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(average_precision(&r).unwrap(), 0.833333, epsilon = 1e-6);
        assert_eq!(average_precision(&result_from_rels(&[false, false])), None);
    }

    #[test]
    fn rr_hand_cases() {
        assert_eq!(reciprocal_rank(&result_from_rels(&[true, false])), Some(1.0));
        assert_eq!(
            reciprocal_rank(&result_from_rels(&[false, false, true])),
            Some(1.0 / 3.0)
        );
        assert_eq!(reciprocal_rank(&result_from_rels(&[false])), None);
    }

    #[test]
    fn ndcg_hand_cases() {
        let perfect = result_from_rels(&[true, true, false, false]);
        for k in [1, 3, 5, 10] {
            assert_abs_diff_eq!(ndcg_at_k(&perfect, k).unwrap(), 1.0, epsilon = 1e-15);
        }
        let second = result_from_rels(&[false, true, false, false, false]);
        assert_abs_diff_eq!(
            ndcg_at_k(&second, 5).unwrap(),
            1.0 / 3f64.log2(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ndcg_at_k(&second, 5).unwrap(), 0.630930, epsilon = 1e-6);
        assert_eq!(ndcg_at_k(&second, 1).unwrap(), 0.0);
    }

    #[test]
    fn single_relevant_ap_equals_rr() {
        let mut rng = crate::seeding::rng_for(1, "ap-rr");
        for _ in 0..200 {
            let n = rng.gen_range(1..10);
            let pos = rng.gen_range(0..n);
            let rels: Vec<bool> = (0..n).map(|i| i == pos).collect();
            let r = result_from_rels(&rels);
            assert_eq!(average_precision(&r), reciprocal_rank(&r));
        }
    }

    /// Direct-definition reference implementations, kept deliberately naive.
    mod reference {
        pub fn ap(rels: &[bool]) -> Option<f64> {
            let total = rels.iter().filter(|&&r| r).count();
            if total == 0 {
                return None;
            }
            let mut out = 0.0;
            for r in 0..rels.len() {
                if rels[r] {
                    let hits_upto = rels[..=r].iter().filter(|&&x| x).count();
                    out += hits_upto as f64 / (r + 1) as f64;
                }
            }
            Some(out / total as f64)
        }

        pub fn rr(rels: &[bool]) -> Option<f64> {
            for (i, &r) in rels.iter().enumerate() {
                if r {
                    return Some(1.0 / (i as f64 + 1.0));
                }
            }
            None
        }

        pub fn ndcg(rels: &[bool], k: usize) -> Option<f64> {
            let gains: Vec<f64> = rels.iter().map(|&r| if r { 1.0 } else { 0.0 }).collect();
            if gains.iter().sum::<f64>() == 0.0 {
                return None;
            }
            let dcg = |g: &[f64]| -> f64 {
                g.iter()
                    .take(k)
                    .enumerate()
                    .map(|(i, &gain)| gain / ((i + 2) as f64).log2())
                    .sum()
            };
            let mut ideal = gains.clone();
            ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
            Some(dcg(&gains) / dcg(&ideal))
        }
    }

    #[test]
    fn metrics_match_reference_on_random_rankings() {
        let mut rng = crate::seeding::rng_for(2, "metric-oracle");
        for _ in 0..1000 {
            let n = rng.gen_range(1..=10);
            let rels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            let r = result_from_rels(&rels);
            match (average_precision(&r), reference::ap(&rels)) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                (a, b) => assert_eq!(a, b),
            }
            match (reciprocal_rank(&r), reference::rr(&rels)) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                (a, b) => assert_eq!(a, b),
            }
            for k in [1usize, 3, 5, 10] {
                match (ndcg_at_k(&r, k), reference::ndcg(&rels, k)) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
    }

    #[test]
    fn buckets_follow_session_length() {
        assert_eq!(Bucket::of_session_len(2), Some(Bucket::Short));
        assert_eq!(Bucket::of_session_len(3), Some(Bucket::Medium));
        assert_eq!(Bucket::of_session_len(4), Some(Bucket::Medium));
        assert_eq!(Bucket::of_session_len(5), Some(Bucket::Long));
        assert_eq!(Bucket::of_session_len(7), Some(Bucket::Long));
        assert_eq!(Bucket::of_session_len(1), None);
    }

    #[test]
    fn bucket_split_partitions_sessions() {
        let cfg = crate::corpus::GenConfig {
            sessions: 200,
            ..crate::corpus::GenConfig::default()
        };
        let sessions = crate::corpus::generate_corpus(&cfg, 5).unwrap();
        let split = bucket_by_session_length(&sessions);
        assert_eq!(
            split.short.len() + split.medium.len() + split.long.len()
                + split.excluded_single_query,
            sessions.len()
        );
        assert!(split.short.iter().all(|s| s.turns.len() == 2));
        assert!(split
            .medium
            .iter()
            .all(|s| (3..=4).contains(&s.turns.len())));
        assert!(split.long.iter().all(|s| s.turns.len() >= 5));
    }

    #[test]
    fn histogram_counts_sum_and_top_bin_includes_one() {
        let hist = EntropyHistogram::from_values(&[0.0, 0.05, 0.51, 1.0, 1.0], 10).unwrap();
        assert_eq!(hist.total(), 5);
        assert_eq!(hist.counts[0], 2);
        assert_eq!(hist.counts[5], 1);
        assert_eq!(hist.counts[9], 2);
        assert!(EntropyHistogram::from_values(&[1.2], 10).is_err());
        let csv = hist.to_csv();
        assert!(csv.starts_with("bin_low,bin_high,count\n"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [0.4, 0.6, 0.7, 0.2];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!(r.t_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.degenerate);
    }

    /// CDF oracle: numerically integrate the t density.
    fn t_cdf_quadrature(t: f64, df: f64) -> f64 {
        // Symmetric density; integrate 0..t with Simpson's rule.
        let gamma_ratio = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
            - statrs::function::gamma::ln_gamma(df / 2.0);
        let norm = (gamma_ratio.exp()) / ((df * std::f64::consts::PI).sqrt());
        let pdf = |x: f64| norm * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
        let steps = 20_000;
        let h = t / steps as f64;
        let mut acc = pdf(0.0) + pdf(t);
        for i in 1..steps {
            let x = i as f64 * h;
            acc += pdf(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + acc * h / 3.0
    }

    #[test]
    fn t_test_textbook_case_matches_quadrature_oracle() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.0, 0.0, 0.0];
        let r = paired_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(r.t_stat, 2.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.t_stat, 3.4641, epsilon = 1e-4);

        let oracle_p = 2.0 * (1.0 - t_cdf_quadrature(r.t_stat, 2.0));
        assert_abs_diff_eq!(r.p_value, oracle_p, epsilon = 1e-6);
        assert_abs_diff_eq!(r.p_value, 0.0742, epsilon = 5e-4);
    }

    #[test]
    fn t_test_degenerate_cases() {
        let a = [1.0, 1.0, 1.0];
        let b = [0.0, 0.0, 0.0];
        let r = paired_t_test(&a, &b).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 0.0);

        assert!(paired_t_test(&[1.0], &[1.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn bonferroni_caps_at_one() {
        assert_eq!(bonferroni(0.01, 6), 0.06);
        assert_eq!(bonferroni(0.3, 6), 1.0);
        assert_eq!(bonferroni(0.2, 0), 0.2);
    }

    proptest! {
        /// Relabeling doc ids leaves metrics unchanged (scores distinct).
        #[test]
        fn metrics_invariant_under_doc_relabeling(
            rels in proptest::collection::vec(any::<bool>(), 1..10),
            offset in 0usize..50,
        ) {
            let n = rels.len();
            let doc_ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
            let renamed: Vec<String> = (0..n).map(|i| format!("x{}", i + offset)).collect();
            let scores: Vec<f64> = (0..n).map(|i| (2 * n - i) as f64).collect();
            let a = RankedResult::from_scores("q", &doc_ids, &scores, &rels).unwrap();
            let b = RankedResult::from_scores("q", &renamed, &scores, &rels).unwrap();
            prop_assert_eq!(average_precision(&a), average_precision(&b));
            prop_assert_eq!(reciprocal_rank(&a), reciprocal_rank(&b));
            for k in [1usize, 3, 5] {
                prop_assert_eq!(ndcg_at_k(&a, k), ndcg_at_k(&b, k));
            }
        }

        /// Appending non-relevant documents below rank k leaves NDCG@k alone.
        #[test]
        fn ndcg_ignores_tail_padding(
            rels in proptest::collection::vec(any::<bool>(), 1..8),
            extra in 1usize..5,
            k in 1usize..6,
        ) {
            prop_assume!(rels.iter().any(|&r| r));
            prop_assume!(k <= rels.len());
            let n = rels.len();
            let mk = |rels: &[bool]| {
                let ids: Vec<String> = (0..rels.len()).map(|i| format!("d{i}")).collect();
                let scores: Vec<f64> = (0..rels.len()).map(|i| (rels.len() * 2 - i) as f64).collect();
                RankedResult::from_scores("q", &ids, &scores, rels).unwrap()
            };
            let base = mk(&rels);
            let mut padded_rels = rels.clone();
            padded_rels.extend(std::iter::repeat(false).take(extra));
            let padded = mk(&padded_rels);
            let _ = n;
            prop_assert_eq!(ndcg_at_k(&base, k), ndcg_at_k(&padded, k));
        }
    }
}
