//! Session data model, behavior windows, input serialization, synthetic
//! session-log generation, and corpus file I/O.
//!
//! A session is an ordered list of query turns; each turn carries a candidate
//! document list and (usually) a first-clicked positive. For the query at
//! turn `i`, the *history window* holds the `(query, clicked document)` pairs
//! of turns before `i` and the *future window* those of up to `k` turns after
//! `i`. Turns without a click contribute no pair to either window.
//!
//! Serialization flattens a window, the current query, and one candidate
//! document into a marker-delimited token-id sequence:
//!
//! ```text
//! history-only:        [CLS] h1q h1d ... q [SEP] d [SEP]
//! history-plus-future: [CLS] h1q h1d ... q [SEP] d [SEP] f1q f1d ... [SEP]
//! ```
//!
//! When the sequence exceeds the length budget, future pairs are dropped from
//! the far end first, then history pairs oldest-first; the current query and
//! candidate document are never truncated.

use std::collections::HashSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::Vocabulary;
use crate::error::{Error, Result};
use crate::seeding::rng_for;

/// One candidate document with its click label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub clicked: bool,
}

/// One query turn: the issued query, its candidate list, and the index of the
/// first-clicked document if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTurn {
    #[serde(rename = "query")]
    pub query_tokens: Vec<String>,
    pub candidates: Vec<Document>,
    pub positive_index: Option<usize>,
}

impl QueryTurn {
    /// The first-clicked positive document, when the turn has one.
    pub fn positive(&self) -> Option<&Document> {
        self.positive_index.map(|i| &self.candidates[i])
    }
}

/// An ordered sequence of query turns issued by one user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub turns: Vec<QueryTurn>,
}

/// A `(query tokens, clicked document tokens)` pair inside a behavior window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorPair {
    pub query: Vec<String>,
    pub doc: Vec<String>,
}

/// The behavior context around a turn: ordered `(query, positive)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BehaviorWindow {
    pub pairs: Vec<BehaviorPair>,
}

impl BehaviorWindow {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn token_len(&self) -> usize {
        self.pairs
            .iter()
            .map(|p| p.query.len() + p.doc.len())
            .sum()
    }
}

/// Which serialization layout a token sequence follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputVariant {
    HistoryOnly,
    HistoryPlusFuture,
}

/// A marker-delimited token-id sequence ready for the encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedInput {
    pub token_ids: Vec<u32>,
    pub variant: InputVariant,
}

impl SerializedInput {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// Behavior pairs of the turns before turn `i` (clickless turns skipped).
pub fn build_history(session: &Session, i: usize) -> Result<BehaviorWindow> {
    if i >= session.turns.len() {
        return Err(Error::input(format!(
            "turn index {i} out of range for session of length {}",
            session.turns.len()
        )));
    }
    Ok(window_over(&session.turns[..i]))
}

/// Behavior pairs of up to `k` turns after turn `i` (clickless turns skipped).
pub fn build_future(session: &Session, i: usize, k: usize) -> Result<BehaviorWindow> {
    let m = session.turns.len();
    if i >= m {
        return Err(Error::input(format!(
            "turn index {i} out of range for session of length {m}"
        )));
    }
    let start = i + 1;
    let end = i.saturating_add(k).min(m - 1);
    if start > end {
        return Ok(BehaviorWindow::empty());
    }
    Ok(window_over(&session.turns[start..=end]))
}

fn window_over(turns: &[QueryTurn]) -> BehaviorWindow {
    let pairs = turns
        .iter()
        .filter_map(|t| {
            t.positive().map(|d| BehaviorPair {
                query: t.query_tokens.clone(),
                doc: d.tokens.clone(),
            })
        })
        .collect();
    BehaviorWindow { pairs }
}

/// Serialize a history window, query, and candidate document as a
/// history-only input.
pub fn serialize_history(
    history: &BehaviorWindow,
    query: &[String],
    doc: &[String],
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<SerializedInput> {
    check_query_doc(query, doc)?;
    let skeleton = query.len() + doc.len() + 3;
    let h_keep = fit_history(history, skeleton, max_len)?;

    let mut ids = Vec::with_capacity(skeleton + history.token_len());
    ids.push(vocab.cls_id());
    push_pairs(&mut ids, &history.pairs[history.pairs.len() - h_keep..], vocab);
    push_tokens(&mut ids, query, vocab);
    ids.push(vocab.sep_id());
    push_tokens(&mut ids, doc, vocab);
    ids.push(vocab.sep_id());
    Ok(SerializedInput {
        token_ids: ids,
        variant: InputVariant::HistoryOnly,
    })
}

/// Serialize history and future windows, query, and candidate document as a
/// history-plus-future input.
pub fn serialize_future(
    history: &BehaviorWindow,
    query: &[String],
    doc: &[String],
    future: &BehaviorWindow,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<SerializedInput> {
    check_query_doc(query, doc)?;
    let skeleton = query.len() + doc.len() + 4;

    // Future pairs are dropped from the far end before history is touched.
    let mut f_keep = future.pairs.len();
    let mut total = skeleton + history.token_len() + future.token_len();
    while total > max_len && f_keep > 0 {
        f_keep -= 1;
        let p = &future.pairs[f_keep];
        total -= p.query.len() + p.doc.len();
    }
    let base = skeleton
        + future.pairs[..f_keep]
            .iter()
            .map(|p| p.query.len() + p.doc.len())
            .sum::<usize>();
    let h_keep = fit_history(history, base, max_len)?;

    let mut ids = Vec::with_capacity(total);
    ids.push(vocab.cls_id());
    push_pairs(&mut ids, &history.pairs[history.pairs.len() - h_keep..], vocab);
    push_tokens(&mut ids, query, vocab);
    ids.push(vocab.sep_id());
    push_tokens(&mut ids, doc, vocab);
    ids.push(vocab.sep_id());
    push_pairs(&mut ids, &future.pairs[..f_keep], vocab);
    ids.push(vocab.sep_id());
    Ok(SerializedInput {
        token_ids: ids,
        variant: InputVariant::HistoryPlusFuture,
    })
}

fn check_query_doc(query: &[String], doc: &[String]) -> Result<()> {
    if query.is_empty() {
        return Err(Error::input("cannot serialize an empty query"));
    }
    if doc.is_empty() {
        return Err(Error::input("cannot serialize an empty candidate document"));
    }
    Ok(())
}

/// How many of the newest history pairs fit in `max_len` given `base` tokens
/// already committed. Oldest pairs are dropped first.
fn fit_history(history: &BehaviorWindow, base: usize, max_len: usize) -> Result<usize> {
    let mut keep = history.pairs.len();
    let mut total = base + history.token_len();
    while total > max_len && keep > 0 {
        let dropped = &history.pairs[history.pairs.len() - keep];
        total -= dropped.query.len() + dropped.doc.len();
        keep -= 1;
    }
    if total > max_len {
        return Err(Error::input(format!(
            "query and document alone exceed the length budget ({total} > {max_len})"
        )));
    }
    Ok(keep)
}

fn push_pairs(ids: &mut Vec<u32>, pairs: &[BehaviorPair], vocab: &Vocabulary) {
    for p in pairs {
        push_tokens(ids, &p.query, vocab);
        push_tokens(ids, &p.doc, vocab);
    }
}

fn push_tokens(ids: &mut Vec<u32>, tokens: &[String], vocab: &Vocabulary) {
    ids.extend(tokens.iter().map(|t| vocab.id_of(t)));
}

// ---------------------------------------------------------------------------
// Synthetic corpus generation
// ---------------------------------------------------------------------------

/// Parameters of the synthetic session-log generator.
///
/// Each session draws a latent intent topic and a confuser topic. Query
/// tokens are noisy realizations of the intent: early turns mix intent,
/// confuser, and common tokens while later turns lean increasingly on the
/// intent pool, so the turns after a query disambiguate the intent better
/// than the turns before it. Every turn's candidate list holds exactly one
/// intent-matching positive, one confuser-topic distractor, and random-topic
/// distractors. With probability `drift_prob` a session switches intent
/// mid-way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub sessions: usize,
    pub topics: usize,
    pub drift_prob: f64,
    pub candidates_per_query: usize,
    pub click_prob: f64,
    /// Probability that a clicked turn's first click lands on a random
    /// distractor instead of the intent-matching document (a misclick).
    pub click_noise: f64,
    pub extra_click_prob: f64,
    pub tokens_per_topic: usize,
    pub common_tokens: usize,
    /// Weight of session length `i + 1` at index `i`.
    pub session_length_weights: Vec<f64>,
    /// Weight of query length `i + 1` at index `i`.
    pub query_len_weights: Vec<f64>,
    /// Weight of document length `i + 1` at index `i`.
    pub doc_len_weights: Vec<f64>,
    /// Share of query tokens drawn from the intent pool at the first turn.
    pub query_intent_start: f64,
    /// Share of query tokens drawn from the intent pool at the last turn.
    pub query_intent_end: f64,
    /// Share of query tokens drawn from the confuser pool at the first turn
    /// (decays to zero by the last turn).
    pub query_confuser_start: f64,
    /// Share of document tokens drawn from the owning topic's pool.
    pub doc_topic_ratio: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            sessions: 1000,
            topics: 12,
            drift_prob: 0.1,
            candidates_per_query: 5,
            click_prob: 0.9,
            click_noise: 0.0,
            extra_click_prob: 0.08,
            tokens_per_topic: 20,
            common_tokens: 30,
            // Mean session length 2.56, matching desk-scale log statistics.
            session_length_weights: vec![0.12, 0.52, 0.18, 0.10, 0.04, 0.025, 0.015],
            // Mean query length 2.85.
            query_len_weights: vec![0.0, 0.30, 0.55, 0.15],
            // Mean document length 7.23.
            doc_len_weights: vec![0.0, 0.0, 0.0, 0.0, 0.08, 0.18, 0.33, 0.25, 0.16],
            query_intent_start: 0.30,
            query_intent_end: 0.85,
            query_confuser_start: 0.30,
            doc_topic_ratio: 0.70,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sessions == 0 {
            return Err(Error::input("sessions must be > 0"));
        }
        if self.topics < 2 {
            return Err(Error::input("need at least 2 intent topics"));
        }
        if !(0.0..=1.0).contains(&self.drift_prob) {
            return Err(Error::input("drift_prob must be in [0, 1]"));
        }
        if self.candidates_per_query == 0 {
            return Err(Error::input("candidates_per_query must be >= 1"));
        }
        for (name, p) in [
            ("click_prob", self.click_prob),
            ("click_noise", self.click_noise),
            ("extra_click_prob", self.extra_click_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("{name} must be in [0, 1]")));
            }
        }
        if self.tokens_per_topic == 0 || self.common_tokens == 0 {
            return Err(Error::input("token pools must be non-empty"));
        }
        for (name, w) in [
            ("session_length_weights", &self.session_length_weights),
            ("query_len_weights", &self.query_len_weights),
            ("doc_len_weights", &self.doc_len_weights),
        ] {
            if w.is_empty() || w.iter().any(|&x| x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::input(format!(
                    "{name} must be non-empty, non-negative, and sum > 0"
                )));
            }
        }
        Ok(())
    }

    fn topic_token(&self, topic: usize, word: usize) -> String {
        format!("t{topic:02}_w{word:02}")
    }

    fn common_token(&self, word: usize) -> String {
        format!("c_w{word:02}")
    }
}

/// Where a sampled token comes from.
#[derive(Clone, Copy)]
enum PoolChoice {
    Intent,
    Confuser,
    Common,
}

struct SessionPlan {
    /// Per turn: (intent topic, confuser topic, progress in [0, 1]).
    turns: Vec<(usize, usize, f64)>,
}

/// Generate a deterministic synthetic corpus.
pub fn generate_corpus(config: &GenConfig, seed: u64) -> Result<Vec<Session>> {
    config.validate()?;
    let mut sessions = Vec::with_capacity(config.sessions);
    for idx in 0..config.sessions {
        let mut rng = rng_for(seed, &format!("session/{idx}"));
        sessions.push(generate_session(config, idx, &mut rng));
    }
    Ok(sessions)
}

fn generate_session(config: &GenConfig, idx: usize, rng: &mut impl Rng) -> Session {
    let m = 1 + sample_weighted(rng, &config.session_length_weights);
    let plan = plan_session(config, m, rng);

    let turns = (0..m)
        .map(|i| {
            let (intent, confuser, progress) = plan.turns[i];
            generate_turn(config, idx, i, intent, confuser, progress, rng)
        })
        .collect();

    Session {
        session_id: format!("s{idx:06}"),
        turns,
    }
}

fn plan_session(config: &GenConfig, m: usize, rng: &mut impl Rng) -> SessionPlan {
    let intent = rng.gen_range(0..config.topics);
    let confuser = other_topic(config.topics, &[intent], rng);
    let switch_at = if m >= 2 && rng.gen::<f64>() < config.drift_prob {
        Some(rng.gen_range(1..m))
    } else {
        None
    };
    let (intent2, confuser2) = match switch_at {
        Some(_) => {
            let i2 = other_topic(config.topics, &[intent], rng);
            let c2 = other_topic(config.topics, &[i2], rng);
            (i2, c2)
        }
        None => (intent, confuser),
    };

    // Progress runs 0..1 within each intent segment, so the signal ramps up
    // again after a drift.
    let mut turns = Vec::with_capacity(m);
    for i in 0..m {
        let (seg_intent, seg_confuser, seg_start, seg_len) = match switch_at {
            Some(s) if i >= s => (intent2, confuser2, s, m - s),
            Some(s) => (intent, confuser, 0, s),
            None => (intent, confuser, 0, m),
        };
        let progress = if seg_len <= 1 {
            1.0
        } else {
            (i - seg_start) as f64 / (seg_len - 1) as f64
        };
        turns.push((seg_intent, seg_confuser, progress));
    }
    SessionPlan { turns }
}

fn other_topic(topics: usize, exclude: &[usize], rng: &mut impl Rng) -> usize {
    loop {
        let t = rng.gen_range(0..topics);
        if !exclude.contains(&t) {
            return t;
        }
    }
}

fn generate_turn(
    config: &GenConfig,
    session_idx: usize,
    turn_idx: usize,
    intent: usize,
    confuser: usize,
    progress: f64,
    rng: &mut impl Rng,
) -> QueryTurn {
    let query_tokens = sample_query(config, intent, confuser, progress, rng);

    let n = config.candidates_per_query;
    let positive_slot = rng.gen_range(0..n);
    let mut candidates = Vec::with_capacity(n);
    let mut distractor_no = 0usize;
    for slot in 0..n {
        let topic = if slot == positive_slot {
            intent
        } else {
            let t = if distractor_no == 0 {
                confuser
            } else {
                other_topic(config.topics, &[intent], rng)
            };
            distractor_no += 1;
            t
        };
        let tokens = sample_doc(config, topic, rng);
        candidates.push(Document {
            doc_id: format!("s{session_idx:06}-t{turn_idx}-c{slot}"),
            tokens,
            clicked: false,
        });
    }

    let positive_index = if rng.gen::<f64>() < config.click_prob {
        let clicked_slot = if n >= 2 && rng.gen::<f64>() < config.click_noise {
            (positive_slot + 1 + rng.gen_range(0..n - 1)) % n
        } else {
            positive_slot
        };
        candidates[clicked_slot].clicked = true;
        if n >= 2 && rng.gen::<f64>() < config.extra_click_prob {
            let extra = (clicked_slot + 1 + rng.gen_range(0..n - 1)) % n;
            candidates[extra].clicked = true;
        }
        Some(clicked_slot)
    } else {
        None
    };

    QueryTurn {
        query_tokens,
        candidates,
        positive_index,
    }
}

fn sample_query(
    config: &GenConfig,
    intent: usize,
    confuser: usize,
    progress: f64,
    rng: &mut impl Rng,
) -> Vec<String> {
    let p_intent = config.query_intent_start
        + (config.query_intent_end - config.query_intent_start) * progress;
    let p_confuser = (config.query_confuser_start * (1.0 - progress)).min(1.0 - p_intent);
    let len = 1 + sample_weighted(rng, &config.query_len_weights);
    (0..len)
        .map(|_| {
            let choice = {
                let u: f64 = rng.gen();
                if u < p_intent {
                    PoolChoice::Intent
                } else if u < p_intent + p_confuser {
                    PoolChoice::Confuser
                } else {
                    PoolChoice::Common
                }
            };
            sample_token(config, choice, intent, confuser, rng)
        })
        .collect()
}

fn sample_doc(config: &GenConfig, topic: usize, rng: &mut impl Rng) -> Vec<String> {
    let len = 1 + sample_weighted(rng, &config.doc_len_weights);
    (0..len)
        .map(|_| {
            if rng.gen::<f64>() < config.doc_topic_ratio {
                config.topic_token(topic, rng.gen_range(0..config.tokens_per_topic))
            } else {
                config.common_token(rng.gen_range(0..config.common_tokens))
            }
        })
        .collect()
}

fn sample_token(
    config: &GenConfig,
    choice: PoolChoice,
    intent: usize,
    confuser: usize,
    rng: &mut impl Rng,
) -> String {
    match choice {
        PoolChoice::Intent => config.topic_token(intent, rng.gen_range(0..config.tokens_per_topic)),
        PoolChoice::Confuser => {
            config.topic_token(confuser, rng.gen_range(0..config.tokens_per_topic))
        }
        PoolChoice::Common => config.common_token(rng.gen_range(0..config.common_tokens)),
    }
}

fn sample_weighted(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

// ---------------------------------------------------------------------------
// Corpus file I/O
// ---------------------------------------------------------------------------

/// Write sessions as UTF-8 JSONL, one session object per line.
pub fn write_corpus(sessions: &[Session], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = BufWriter::new(file);
    for s in sessions {
        let line = serde_json::to_string(s)
            .map_err(|e| Error::format(format!("failed to encode session: {e}")))?;
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Load a JSONL corpus, validating every record's invariants.
pub fn load_corpus(path: &Path) -> Result<Vec<Session>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = std::io::BufReader::new(file);
    let mut sessions = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let session: Session = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        validate_session(&session).map_err(|msg| Error::Parse { line: lineno, msg })?;
        sessions.push(session);
    }
    Ok(sessions)
}

fn validate_session(session: &Session) -> std::result::Result<(), String> {
    if session.turns.is_empty() {
        return Err(format!("session {} has no turns", session.session_id));
    }
    for (ti, turn) in session.turns.iter().enumerate() {
        if turn.candidates.is_empty() {
            return Err(format!("turn {ti} has an empty candidate list"));
        }
        let mut seen = HashSet::new();
        for doc in &turn.candidates {
            if doc.tokens.is_empty() {
                return Err(format!("document {} has no tokens", doc.doc_id));
            }
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(format!("duplicate doc_id {} in turn {ti}", doc.doc_id));
            }
        }
        if let Some(p) = turn.positive_index {
            if p >= turn.candidates.len() {
                return Err(format!(
                    "positive_index {p} out of range in turn {ti} ({} candidates)",
                    turn.candidates.len()
                ));
            }
            if !turn.candidates[p].clicked {
                return Err(format!("positive_index {p} points at an unclicked document"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ranking instances
// ---------------------------------------------------------------------------

/// One query turn unrolled with its history and future windows, the unit both
/// training and evaluation iterate over.
#[derive(Debug, Clone)]
pub struct RankingInstance {
    pub session_id: String,
    pub session_len: usize,
    pub turn_index: usize,
    pub history: BehaviorWindow,
    pub query: Vec<String>,
    pub candidates: Vec<Document>,
    pub positive_index: Option<usize>,
    pub future: BehaviorWindow,
}

impl RankingInstance {
    /// Stable key identifying this query across runs.
    pub fn query_key(&self) -> String {
        format!("{}:{}", self.session_id, self.turn_index)
    }
}

/// Unroll every turn of every session into a [`RankingInstance`], with future
/// windows capped at `future_budget` turns.
pub fn ranking_instances(sessions: &[Session], future_budget: usize) -> Vec<RankingInstance> {
    let mut out = Vec::new();
    for session in sessions {
        let m = session.turns.len();
        for i in 0..m {
            let turn = &session.turns[i];
            out.push(RankingInstance {
                session_id: session.session_id.clone(),
                session_len: m,
                turn_index: i,
                history: build_history(session, i).expect("index in range"),
                query: turn.query_tokens.clone(),
                candidates: turn.candidates.clone(),
                positive_index: turn.positive_index,
                future: build_future(session, i, future_budget).expect("index in range"),
            });
        }
    }
    out
}
