//! Token vocabulary with reserved marker ids.

use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use crate::corpus::Session;
use crate::error::{Error, Result};

pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";

const RESERVED: [&str; 4] = [PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN];

/// An injective token-to-id map with reserved ids for padding, unknown,
/// classification, and separator markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Build from an arbitrary token stream: tokens are deduplicated and
    /// sorted so the id assignment is independent of input order.
    pub fn build(tokens: impl IntoIterator<Item = String>) -> Self {
        let unique: BTreeSet<String> = tokens
            .into_iter()
            .filter(|t| !RESERVED.contains(&t.as_str()))
            .collect();
        let mut all: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        all.extend(unique);
        Self::from_token_list(all).expect("constructed list is valid")
    }

    /// Build over every query and document token in a corpus.
    pub fn from_corpus(sessions: &[Session]) -> Self {
        let mut tokens = Vec::new();
        for s in sessions {
            for t in &s.turns {
                tokens.extend(t.query_tokens.iter().cloned());
                for d in &t.candidates {
                    tokens.extend(d.tokens.iter().cloned());
                }
            }
        }
        Self::build(tokens)
    }

    /// Reconstruct from an id-ordered token list (checkpoint load path).
    pub fn from_token_list(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len() {
            return Err(Error::format("vocabulary is missing reserved tokens"));
        }
        for (i, r) in RESERVED.iter().enumerate() {
            if tokens[i] != *r {
                return Err(Error::format(format!(
                    "vocabulary id {i} must be {r}, found {}",
                    tokens[i]
                )));
            }
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::format(format!("duplicate vocabulary token {t}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad_id(&self) -> u32 {
        0
    }

    pub fn unk_id(&self) -> u32 {
        1
    }

    pub fn cls_id(&self) -> u32 {
        2
    }

    pub fn sep_id(&self) -> u32 {
        3
    }

    /// Id of a token, or the unknown id for out-of-vocabulary tokens.
    pub fn id_of(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(self.unk_id())
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Map pre-split tokens to ids. Total: unknowns become the unknown id.
    pub fn tokenize<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id_of(t.as_ref())).collect()
    }

    /// Whitespace-split then map to ids.
    pub fn tokenize_text(&self, text: &str) -> Vec<u32> {
        text.split_whitespace().map(|t| self.id_of(t)).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Hex SHA-256 over the id-ordered token list.
    pub fn hash_hex(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
