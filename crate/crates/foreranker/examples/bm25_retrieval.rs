//! BM25 indexing, scoring, and candidate retrieval.
//!
//! Builds an inverted index over a corpus's document pool, scores a query,
//! and retrieves candidates with the guarantee that a designated positive
//! document makes the list.
//!
//! Run: `cargo run --example bm25_retrieval`

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::retrieval::{
    bm25_score, build_index, document_pool, retrieve, DEFAULT_B, DEFAULT_K1,
};

fn main() {
    let config = GenConfig {
        sessions: 200,
        ..GenConfig::default()
    };
    let sessions = generate_corpus(&config, 13).expect("valid config");
    let pool = document_pool(&sessions);
    let index = build_index(&pool).expect("unique doc ids");
    println!(
        "indexed {} documents (avg length {:.2})",
        index.doc_count(),
        index.average_doc_length()
    );

    let turn = &sessions[0].turns[0];
    let query = &turn.query_tokens;
    println!("\nquery: {:?}", query.join(" "));

    let top = retrieve(&index, query, 5, None, DEFAULT_K1, DEFAULT_B).expect("retrieve");
    println!("top 5 by BM25:");
    for doc_id in &top {
        let score = bm25_score(&index, query, doc_id, DEFAULT_K1, DEFAULT_B).unwrap();
        println!("  {doc_id}: {score:.4}");
    }

    // Benchmark-style candidate construction: the clicked positive must be in
    // the list even when BM25 would rank it below the cutoff.
    if let Some(pos) = turn.positive_index {
        let positive_id = &turn.candidates[pos].doc_id;
        let candidates =
            retrieve(&index, query, 5, Some(positive_id), DEFAULT_K1, DEFAULT_B).unwrap();
        println!("\nwith must-include positive {positive_id}:");
        for doc_id in &candidates {
            let marker = if doc_id == positive_id { "  <- positive" } else { "" };
            println!("  {doc_id}{marker}");
        }
    }
}
