//! MAP, MRR, and NDCG@k from ranked results, with session-length bucketing.
//!
//! Run: `cargo run --example rank_metrics`

use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::eval::{
    average_precision, bucket_by_session_length, ndcg_at_k, reciprocal_rank, RankedResult,
};

fn main() {
    // A hand-built ranking: relevant documents at ranks 1 and 3 of 5.
    let doc_ids: Vec<String> = (0..5).map(|i| format!("d{i}")).collect();
    let scores = [0.9, 0.7, 0.5, 0.3, 0.1];
    let relevant = [true, false, true, false, false];
    let result = RankedResult::from_scores("s0:0", &doc_ids, &scores, &relevant).unwrap();

    println!("ranking (relevant at ranks 1 and 3):");
    println!(
        "  AP      = {:.6}  (expect (1 + 2/3)/2 = 0.833333)",
        average_precision(&result).unwrap()
    );
    println!("  RR      = {:.6}", reciprocal_rank(&result).unwrap());
    for k in [1, 3, 5, 10] {
        println!("  NDCG@{k:<2} = {:.6}", ndcg_at_k(&result, k).unwrap());
    }

    // Ties in score are broken by ascending doc_id so evaluation is total.
    let tied = RankedResult::from_scores(
        "s0:1",
        &doc_ids,
        &[0.5, 0.5, 0.5, 0.5, 0.5],
        &relevant,
    )
    .unwrap();
    let order: Vec<&str> = tied.ranked.iter().map(|(d, _)| d.as_str()).collect();
    println!("\nall-tied scores rank by doc_id: {order:?}");

    // Session-length buckets: short (2 queries), medium (3-4), long (5+).
    let sessions = generate_corpus(
        &GenConfig {
            sessions: 1000,
            ..GenConfig::default()
        },
        3,
    )
    .unwrap();
    let split = bucket_by_session_length(&sessions);
    println!("\nbucketed {} sessions:", sessions.len());
    println!("  short  (2 queries):   {}", split.short.len());
    println!("  medium (3-4 queries): {}", split.medium.len());
    println!("  long   (5+ queries):  {}", split.long.len());
    println!("  excluded single-query sessions: {}", split.excluded_single_query);
}
