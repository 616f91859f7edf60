//! Behavior windows and input serialization.
//!
//! Shows how a turn's history and future windows are extracted from a
//! session and flattened into the marker-delimited token sequences the
//! encoder consumes: `[CLS] history... q [SEP] d [SEP]` for the deployable
//! ranker, with ` future... [SEP]` appended for the training-time twin.
//!
//! Run: `cargo run --example behavior_windows`

use foreranker::corpus::{build_future, build_history, serialize_future, serialize_history};
use foreranker::corpus::{generate_corpus, GenConfig};
use foreranker::encoder::Vocabulary;

fn main() {
    let config = GenConfig {
        sessions: 50,
        drift_prob: 0.0,
        ..GenConfig::default()
    };
    let sessions = generate_corpus(&config, 11).expect("valid config");
    let vocab = Vocabulary::from_corpus(&sessions);

    // Pick a session with at least three turns so both windows are non-empty.
    let session = sessions
        .iter()
        .find(|s| s.turns.len() >= 3 && s.turns.iter().all(|t| t.positive_index.is_some()))
        .expect("corpus contains a long fully-clicked session");
    let i = 1;
    let turn = &session.turns[i];

    let history = build_history(session, i).unwrap();
    let future = build_future(session, i, 2).unwrap();
    println!("session {} turn {i}:", session.session_id);
    println!("  query:   {:?}", turn.query_tokens.join(" "));
    println!("  history: {} pair(s)", history.pairs.len());
    for p in &history.pairs {
        println!("    q={:?} d={:?}", p.query.join(" "), p.doc.join(" "));
    }
    println!("  future:  {} pair(s) (budget 2)", future.pairs.len());
    for p in &future.pairs {
        println!("    q={:?} d={:?}", p.query.join(" "), p.doc.join(" "));
    }

    let doc = &turn.candidates[turn.positive_index.unwrap()];
    let xh = serialize_history(&history, &turn.query_tokens, &doc.tokens, &vocab, 128).unwrap();
    let xf =
        serialize_future(&history, &turn.query_tokens, &doc.tokens, &future, &vocab, 128).unwrap();

    let render = |ids: &[u32]| -> String {
        ids.iter()
            .map(|&id| vocab.token(id).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("\nhistory-only input ({} tokens):", xh.len());
    println!("  {}", render(&xh.token_ids));
    println!("history-plus-future input ({} tokens):", xf.len());
    println!("  {}", render(&xf.token_ids));

    // A tight length budget drops far-future pairs first, then the oldest
    // history pairs; the current query and document always survive.
    let tight = serialize_future(
        &history,
        &turn.query_tokens,
        &doc.tokens,
        &future,
        &vocab,
        turn.query_tokens.len() + doc.tokens.len() + 6,
    )
    .unwrap();
    println!("\nsame input under a tight budget ({} tokens):", tight.len());
    println!("  {}", render(&tight.token_ids));
}
