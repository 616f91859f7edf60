//! Labeled sub-seed derivation.
//!
//! Every run takes one user-facing seed; every consumer of randomness derives
//! its own stream from `(seed, label)` so that adding or reordering consumers
//! never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a 32-byte sub-seed from the run seed and a stable label.
pub fn derive_seed(seed: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(label.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.finalize().into()
}

/// Deterministic RNG for the given `(seed, label)` pair.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(seed, label))
}
