//! Tokenization, a compact trainable sequence encoder with a `[CLS]`-pooled
//! scoring head, siamese initialization, and portable checkpoints.

mod checkpoint;
mod net;
mod params;
mod vocab;

pub use checkpoint::{
    encode as encode_checkpoint, load_checkpoint, load_checkpoint_any, save_checkpoint, AnyModel,
    Model, FORMAT_VERSION,
};
pub use net::{backward, encode_score, forward, score_candidates, ForwardCache, TurnScorer};
pub use params::{
    init_params, init_siamese, ArchConfig, Dtype, HeadParams, LayerParams, ModelParams, Real,
};
pub use vocab::Vocabulary;
