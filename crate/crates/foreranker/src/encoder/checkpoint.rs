//! Versioned, portable checkpoint files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "FRNK" | version u32 | header_len u32 | header JSON | tensor data
//! ```
//!
//! The JSON header carries the architecture config, the dtype, the full
//! id-ordered vocabulary with its hash, and a tensor manifest (names and
//! shapes in traversal order). Tensor data follows as raw little-endian
//! scalars in manifest order, so a checkpoint is self-contained: loading it
//! recovers the exact model and tokenizer that produced it.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::TurnScorer;
use super::params::{ArchConfig, Dtype, ModelParams, Real};
use super::vocab::Vocabulary;
use crate::corpus::{BehaviorWindow, Document};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FRNK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dtype: Dtype,
    arch: ArchConfig,
    vocab_hash: String,
    vocab: Vec<String>,
    tensors: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

/// A parameter set bundled with the vocabulary it was trained against.
#[derive(Debug, Clone)]
pub struct Model<F> {
    pub params: ModelParams<F>,
    pub vocab: Vocabulary,
}

impl<F: Real> TurnScorer for Model<F> {
    fn score_turn(
        &self,
        history: &BehaviorWindow,
        query: &[String],
        candidates: &[Document],
        future: Option<&BehaviorWindow>,
    ) -> Result<Vec<f64>> {
        let scores =
            super::net::score_candidates(&self.params, history, query, candidates, future, &self.vocab)?;
        Ok(scores.into_iter().map(Real::as_f64).collect())
    }

    fn arch(&self) -> &ArchConfig {
        &self.params.arch
    }

    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
}

/// A loaded model of whichever dtype the file declares.
pub enum AnyModel {
    F32(Model<f32>),
    F64(Model<f64>),
}

impl AnyModel {
    pub fn as_scorer(&self) -> &dyn TurnScorer {
        match self {
            AnyModel::F32(m) => m,
            AnyModel::F64(m) => m,
        }
    }

    pub fn arch(&self) -> &ArchConfig {
        match self {
            AnyModel::F32(m) => &m.params.arch,
            AnyModel::F64(m) => &m.params.arch,
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            AnyModel::F32(_) => Dtype::F32,
            AnyModel::F64(_) => Dtype::F64,
        }
    }
}

/// Serialize a model to bytes.
pub fn encode<F: Real>(params: &ModelParams<F>, vocab: &Vocabulary) -> Result<Vec<u8>> {
    if vocab.len() != params.arch.vocab_size {
        return Err(Error::format(format!(
            "vocabulary size {} does not match architecture vocab_size {}",
            vocab.len(),
            params.arch.vocab_size
        )));
    }
    let manifest = ModelParams::<F>::tensor_manifest(&params.arch);
    let header = Header {
        format_version: FORMAT_VERSION,
        dtype: F::DTYPE,
        arch: params.arch.clone(),
        vocab_hash: vocab.hash_hex(),
        vocab: vocab.tokens().to_vec(),
        tensors: manifest
            .into_iter()
            .map(|(name, shape)| TensorEntry { name, shape })
            .collect(),
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| Error::format(format!("failed to encode checkpoint header: {e}")))?;

    let flat = params.to_flat();
    let mut out = Vec::with_capacity(12 + header_json.len() + flat.len() * F::BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    for x in flat {
        x.write_le(&mut out);
    }
    Ok(out)
}

/// Write a checkpoint atomically (temp file, then rename).
pub fn save_checkpoint<F: Real>(
    params: &ModelParams<F>,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<()> {
    let bytes = encode(params, vocab)?;
    let tmp = path.with_extension("tmp");
    let io_err = |e| Error::io(path.display().to_string(), e);
    let mut file = std::fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(&bytes).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn read_header(bytes: &[u8], path: &Path) -> Result<(Header, usize)> {
    let fail = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 {
        return Err(fail("file too short for a checkpoint header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(fail("bad magic; not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(fail(format!(
            "format version {version} unsupported (expected {FORMAT_VERSION})"
        )));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() < 12 + header_len {
        return Err(fail("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[12..12 + header_len])
        .map_err(|e| fail(format!("invalid header JSON: {e}")))?;
    Ok((header, 12 + header_len))
}

fn decode_params<F: Real>(header: &Header, data: &[u8], path: &Path) -> Result<ModelParams<F>> {
    let fail = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    header.arch.validate()?;
    let manifest = ModelParams::<F>::tensor_manifest(&header.arch);
    if manifest.len() != header.tensors.len()
        || manifest
            .iter()
            .zip(&header.tensors)
            .any(|((n, s), e)| *n != e.name || *s != e.shape)
    {
        return Err(fail(
            "tensor manifest does not match the declared architecture".into(),
        ));
    }
    let count: usize = manifest
        .iter()
        .map(|(_, s)| s.iter().product::<usize>())
        .sum();
    let expected = count * F::BYTES;
    if data.len() != expected {
        return Err(fail(format!(
            "tensor data is {} bytes, expected {expected} (truncated or corrupt)",
            data.len()
        )));
    }
    let mut flat = Vec::with_capacity(count);
    for chunk in data.chunks_exact(F::BYTES) {
        flat.push(F::read_le(chunk));
    }
    let mut params = ModelParams::<F>::zeros(&header.arch);
    params.copy_from_flat(&flat);
    Ok(params)
}

fn decode_vocab(header: &Header, path: &Path) -> Result<Vocabulary> {
    let vocab = Vocabulary::from_token_list(header.vocab.clone())?;
    if vocab.hash_hex() != header.vocab_hash {
        return Err(Error::Format(format!(
            "{}: vocabulary hash mismatch",
            path.display()
        )));
    }
    if vocab.len() != header.arch.vocab_size {
        return Err(Error::Format(format!(
            "{}: vocabulary has {} tokens but architecture declares {}",
            path.display(),
            vocab.len(),
            header.arch.vocab_size
        )));
    }
    Ok(vocab)
}

/// Load a checkpoint whose dtype must match `F`. When `expected_arch` is
/// given, the stored architecture must match it exactly.
pub fn load_checkpoint<F: Real>(path: &Path, expected_arch: Option<&ArchConfig>) -> Result<Model<F>> {
    let bytes = read_file(path)?;
    let (header, data_start) = read_header(&bytes, path)?;
    if header.dtype != F::DTYPE {
        return Err(Error::Format(format!(
            "{}: checkpoint dtype is {} but {} was requested",
            path.display(),
            header.dtype,
            F::DTYPE
        )));
    }
    if let Some(expected) = expected_arch {
        if header.arch != *expected {
            return Err(Error::Format(format!(
                "{}: architecture mismatch: file has {:?}, expected {:?}",
                path.display(),
                header.arch,
                expected
            )));
        }
    }
    let vocab = decode_vocab(&header, path)?;
    let params = decode_params::<F>(&header, &bytes[data_start..], path)?;
    Ok(Model { params, vocab })
}

/// Load a checkpoint of whichever dtype it declares.
pub fn load_checkpoint_any(path: &Path) -> Result<AnyModel> {
    let bytes = read_file(path)?;
    let (header, data_start) = read_header(&bytes, path)?;
    let vocab = decode_vocab(&header, path)?;
    let data = &bytes[data_start..];
    match header.dtype {
        Dtype::F32 => Ok(AnyModel::F32(Model {
            params: decode_params::<f32>(&header, data, path)?,
            vocab,
        })),
        Dtype::F64 => Ok(AnyModel::F64(Model {
            params: decode_params::<f64>(&header, data, path)?,
            vocab,
        })),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(bytes)
}
