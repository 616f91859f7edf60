//! BM25 candidate retrieval over a document pool.
//!
//! Scores follow the Okapi weighting with a non-negative idf:
//!
//! ```text
//! score(q, d) = Σ_t idf(t) · tf·(k1+1) / (tf + k1·(1 - b + b·len/avglen))
//! idf(t)     = ln(N / (df + 0.5) + 1)
//! ```
//!
//! Internal document ids are assigned after sorting the pool's doc_ids, so
//! the index (and every retrieval result) is independent of input order, and
//! postings come out sorted by doc_id.

use std::collections::HashMap;

use crate::corpus::{Document, Session};
use crate::error::{Error, Result};

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

/// Term postings plus the corpus statistics BM25 needs.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    doc_lengths: Vec<usize>,
    /// term → (internal doc index, term frequency), sorted by doc index.
    postings: HashMap<String, Vec<(u32, u32)>>,
    total_len: usize,
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn average_doc_length(&self) -> f64 {
        self.total_len as f64 / self.doc_ids.len() as f64
    }

    pub fn doc_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_frequency(&self, term: &str, doc_id: &str) -> usize {
        let Some(idx) = self.doc_index(doc_id) else {
            return 0;
        };
        self.postings
            .get(term)
            .and_then(|p| p.binary_search_by_key(&idx, |&(d, _)| d).ok().map(|i| p[i].1))
            .unwrap_or(0) as usize
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<usize> {
        self.doc_index(doc_id).map(|i| self.doc_lengths[i as usize])
    }

    fn doc_index(&self, doc_id: &str) -> Option<u32> {
        self.doc_ids
            .binary_search_by(|d| d.as_str().cmp(doc_id))
            .ok()
            .map(|i| i as u32)
    }

    fn idf(&self, term: &str) -> f64 {
        let df = self.doc_frequency(term) as f64;
        (self.doc_count() as f64 / (df + 0.5) + 1.0).ln()
    }
}

/// Every candidate document in a corpus, as a retrieval pool.
pub fn document_pool(sessions: &[Session]) -> Vec<Document> {
    sessions
        .iter()
        .flat_map(|s| s.turns.iter())
        .flat_map(|t| t.candidates.iter().cloned())
        .collect()
}

/// Build an inverted index over a pool of documents with unique doc_ids.
pub fn build_index(pool: &[Document]) -> Result<InvertedIndex> {
    if pool.is_empty() {
        return Err(Error::input("document pool is empty"));
    }
    let mut sorted: Vec<&Document> = pool.iter().collect();
    sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for w in sorted.windows(2) {
        if w[0].doc_id == w[1].doc_id {
            return Err(Error::input(format!(
                "duplicate doc_id {} in document pool",
                w[0].doc_id
            )));
        }
    }

    let mut postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
    let mut doc_lengths = Vec::with_capacity(sorted.len());
    let mut total_len = 0usize;
    for (idx, doc) in sorted.iter().enumerate() {
        doc_lengths.push(doc.tokens.len());
        total_len += doc.tokens.len();
        let mut counts: HashMap<&str, u32> = HashMap::new();
        for t in &doc.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            postings
                .entry(term.to_string())
                .or_default()
                .push((idx as u32, tf));
        }
    }
    for list in postings.values_mut() {
        list.sort_by_key(|&(d, _)| d);
    }

    Ok(InvertedIndex {
        doc_ids: sorted.into_iter().map(|d| d.doc_id.clone()).collect(),
        doc_lengths,
        postings,
        total_len,
    })
}

/// BM25 score of one document against a query.
pub fn bm25_score(
    index: &InvertedIndex,
    query: &[String],
    doc_id: &str,
    k1: f64,
    b: f64,
) -> Result<f64> {
    check_params(k1, b)?;
    let idx = index
        .doc_index(doc_id)
        .ok_or_else(|| Error::input(format!("doc_id {doc_id} is not indexed")))?;
    let len = index.doc_lengths[idx as usize] as f64;
    let avglen = index.average_doc_length();
    let mut score = 0.0;
    for term in query {
        let Some(list) = index.postings.get(term) else {
            continue;
        };
        let Ok(pos) = list.binary_search_by_key(&idx, |&(d, _)| d) else {
            continue;
        };
        let tf = list[pos].1 as f64;
        let idf = index.idf(term);
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avglen));
    }
    Ok(score)
}

/// Top-`n` doc_ids by BM25 score, ties broken by ascending doc_id. When
/// `must_include` is given and missing from the top `n`, it replaces the last
/// entry.
pub fn retrieve(
    index: &InvertedIndex,
    query: &[String],
    n: usize,
    must_include: Option<&str>,
    k1: f64,
    b: f64,
) -> Result<Vec<String>> {
    check_params(k1, b)?;
    if n == 0 {
        return Err(Error::input("retrieve needs n >= 1"));
    }
    let avglen = index.average_doc_length();
    let mut scores = vec![0.0f64; index.doc_count()];
    for term in query {
        let Some(list) = index.postings.get(term) else {
            continue;
        };
        let idf = index.idf(term);
        for &(doc, tf) in list {
            let tf = tf as f64;
            let len = index.doc_lengths[doc as usize] as f64;
            scores[doc as usize] +=
                idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avglen));
        }
    }

    // Indices sort by (score desc, doc_id asc); doc ids are stored sorted, so
    // index order is doc_id order.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    order.truncate(n);
    let mut result: Vec<String> = order.iter().map(|&i| index.doc_ids[i].clone()).collect();

    if let Some(required) = must_include {
        if index.doc_index(required).is_none() {
            return Err(Error::input(format!(
                "must_include doc_id {required} is not indexed"
            )));
        }
        if !result.iter().any(|d| d == required) {
            let last = result.len() - 1;
            result[last] = required.to_string();
        }
    }
    Ok(result)
}

fn check_params(k1: f64, b: f64) -> Result<()> {
    if k1 <= 0.0 || !k1.is_finite() {
        return Err(Error::input("k1 must be > 0"));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::input("b must be in [0, 1]"));
    }
    Ok(())
}
