//! Context-aware document ranking for search sessions, with a training scheme
//! that lets a history-only ranker absorb signal from future session turns.
//!
//! A search session is a short sequence of queries and clicks pursuing one
//! information need. At inference time only the turns *before* the current
//! query are available, but at training time the whole session is on disk.
//! This crate trains two twin rankers side by side: a history-conditioned
//! model (the deployable artifact, called the ForeRanker) and a future-aware
//! model that additionally reads the turns after the current query. Each step,
//! whichever twin scores the clicked document higher acts as teacher and is
//! trained on the gold label; the other distills from the teacher's softmax
//! distribution over the candidates. A polynomially decaying warm-up weight
//! blends gold-label loss into the student early in training.
//!
//! The crate is organized around that pipeline:
//!
//! - [`corpus`]: session data model, behavior windows, input serialization,
//!   synthetic session-log generation, and JSONL I/O.
//! - [`encoder`]: vocabulary, a compact trainable transformer encoder with a
//!   `[CLS]`-pooled scoring head, and portable checkpoints.
//! - [`objectives`]: softmax relevance distributions, listwise NLL, KL
//!   distillation, the teacher gate, warm-up weights, label smoothing, and
//!   entropy.
//! - [`trainer`]: the siamese optimization loop plus its three ablation modes.
//! - [`retrieval`]: BM25 inverted-index candidate retrieval.
//! - [`eval`]: MAP/MRR/NDCG, session-length and position breakdowns, entropy
//!   histograms, and paired significance tests.
//! - [`cli`]: the `gen-data`/`train`/`eval`/`compare`/`analyze-entropy`
//!   subcommands used by the `foreranker` binary.
//!
//! Each major capability also has a runnable example under `examples/`.

pub mod cli;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod objectives;
pub mod retrieval;
pub mod seeding;
pub mod trainer;

pub use error::{Error, Result};
