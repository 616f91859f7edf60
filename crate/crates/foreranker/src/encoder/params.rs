//! Architecture configuration and trainable parameters.
//!
//! Both siamese twins share one [`ArchConfig`] and have identical tensor
//! shapes. Parameters can be flattened into a single `Vec` in a fixed
//! traversal order; the optimizer, the finite-difference harness, and the
//! checkpoint format all rely on that order being stable.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::rng_for;

/// Scalar type the encoder computes in. Training runs in `f32` or `f64`;
/// gradient verification always instantiates `f64`.
pub trait Real:
    num_traits::Float
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    const DTYPE: Dtype;
    const BYTES: usize;
    fn of_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl Real for f32 {
    const DTYPE: Dtype = Dtype::F32;
    const BYTES: usize = 4;
    fn of_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Real for f64 {
    const DTYPE: Dtype = Dtype::F64;
    const BYTES: usize = 8;
    fn of_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

/// Element type tag stored in checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dtype {
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "f64")]
    F64,
}

impl std::fmt::Display for Dtype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dtype::F32 => write!(f, "f32"),
            Dtype::F64 => write!(f, "f64"),
        }
    }
}

/// Shape of one encoder plus its scoring head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub vocab_size: usize,
    pub max_len: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub head_hidden: usize,
}

impl ArchConfig {
    /// Default shape: 2 self-attention layers of width 64 with 2 heads,
    /// feed-forward width 128, one hidden scoring layer of width 64,
    /// sequences up to 128 tokens.
    pub fn with_vocab(vocab_size: usize) -> Self {
        ArchConfig {
            vocab_size,
            max_len: 128,
            d_model: 64,
            n_layers: 2,
            n_heads: 2,
            d_ff: 128,
            head_hidden: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 4 {
            return Err(Error::input("vocab_size must cover the reserved ids"));
        }
        for (name, v) in [
            ("max_len", self.max_len),
            ("d_model", self.d_model),
            ("n_layers", self.n_layers),
            ("n_heads", self.n_heads),
            ("d_ff", self.d_ff),
            ("head_hidden", self.head_hidden),
        ] {
            if v == 0 {
                return Err(Error::input(format!("{name} must be > 0")));
            }
        }
        if self.d_model % self.n_heads != 0 {
            return Err(Error::input(format!(
                "d_model {} must be divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        Ok(())
    }
}

/// One self-attention layer's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<F> {
    pub wq: Array2<F>,
    pub bq: Array1<F>,
    pub wk: Array2<F>,
    pub bk: Array1<F>,
    pub wv: Array2<F>,
    pub bv: Array1<F>,
    pub wo: Array2<F>,
    pub bo: Array1<F>,
    pub ln1_gamma: Array1<F>,
    pub ln1_beta: Array1<F>,
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
    pub ln2_gamma: Array1<F>,
    pub ln2_beta: Array1<F>,
}

/// `[CLS]`-pooled scoring head: one hidden layer, then a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams<F> {
    pub w_hidden: Array2<F>,
    pub b_hidden: Array1<F>,
    pub w_out: Array1<F>,
    pub b_out: Array1<F>,
}

/// All trainable weights of one encoder plus scoring head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub arch: ArchConfig,
    pub token_embed: Array2<F>,
    pub pos_embed: Array2<F>,
    pub emb_ln_gamma: Array1<F>,
    pub emb_ln_beta: Array1<F>,
    pub layers: Vec<LayerParams<F>>,
    pub head: HeadParams<F>,
}

impl<F: Real> ModelParams<F> {
    /// All-zero parameters of the given shape.
    pub fn zeros(arch: &ArchConfig) -> Self {
        let d = arch.d_model;
        let layer = || LayerParams {
            wq: Array2::zeros((d, d)),
            bq: Array1::zeros(d),
            wk: Array2::zeros((d, d)),
            bk: Array1::zeros(d),
            wv: Array2::zeros((d, d)),
            bv: Array1::zeros(d),
            wo: Array2::zeros((d, d)),
            bo: Array1::zeros(d),
            ln1_gamma: Array1::zeros(d),
            ln1_beta: Array1::zeros(d),
            w1: Array2::zeros((d, arch.d_ff)),
            b1: Array1::zeros(arch.d_ff),
            w2: Array2::zeros((arch.d_ff, d)),
            b2: Array1::zeros(d),
            ln2_gamma: Array1::zeros(d),
            ln2_beta: Array1::zeros(d),
        };
        ModelParams {
            arch: arch.clone(),
            token_embed: Array2::zeros((arch.vocab_size, d)),
            pos_embed: Array2::zeros((arch.max_len, d)),
            emb_ln_gamma: Array1::zeros(d),
            emb_ln_beta: Array1::zeros(d),
            layers: (0..arch.n_layers).map(|_| layer()).collect(),
            head: HeadParams {
                w_hidden: Array2::zeros((d, arch.head_hidden)),
                b_hidden: Array1::zeros(arch.head_hidden),
                w_out: Array1::zeros(arch.head_hidden),
                b_out: Array1::zeros(1),
            },
        }
    }

    /// Named tensors with shapes, in flat traversal order.
    pub fn tensor_manifest(arch: &ArchConfig) -> Vec<(String, Vec<usize>)> {
        let d = arch.d_model;
        let mut out = vec![
            ("token_embed".to_string(), vec![arch.vocab_size, d]),
            ("pos_embed".to_string(), vec![arch.max_len, d]),
            ("emb_ln_gamma".to_string(), vec![d]),
            ("emb_ln_beta".to_string(), vec![d]),
        ];
        for l in 0..arch.n_layers {
            let p = |name: &str| format!("layer{l}.{name}");
            out.extend([
                (p("wq"), vec![d, d]),
                (p("bq"), vec![d]),
                (p("wk"), vec![d, d]),
                (p("bk"), vec![d]),
                (p("wv"), vec![d, d]),
                (p("bv"), vec![d]),
                (p("wo"), vec![d, d]),
                (p("bo"), vec![d]),
                (p("ln1_gamma"), vec![d]),
                (p("ln1_beta"), vec![d]),
                (p("w1"), vec![d, arch.d_ff]),
                (p("b1"), vec![arch.d_ff]),
                (p("w2"), vec![arch.d_ff, d]),
                (p("b2"), vec![d]),
                (p("ln2_gamma"), vec![d]),
                (p("ln2_beta"), vec![d]),
            ]);
        }
        out.extend([
            ("head.w_hidden".to_string(), vec![d, arch.head_hidden]),
            ("head.b_hidden".to_string(), vec![arch.head_hidden]),
            ("head.w_out".to_string(), vec![arch.head_hidden]),
            ("head.b_out".to_string(), vec![1]),
        ]);
        out
    }

    pub fn param_count(&self) -> usize {
        Self::tensor_manifest(&self.arch)
            .iter()
            .map(|(_, shape)| shape.iter().product::<usize>())
            .sum()
    }

    fn for_each_tensor<'a>(&'a self, f: &mut dyn FnMut(&'a [F])) {
        f(self.token_embed.as_slice().expect("standard layout"));
        f(self.pos_embed.as_slice().expect("standard layout"));
        f(self.emb_ln_gamma.as_slice().expect("standard layout"));
        f(self.emb_ln_beta.as_slice().expect("standard layout"));
        for l in &self.layers {
            f(l.wq.as_slice().expect("standard layout"));
            f(l.bq.as_slice().expect("standard layout"));
            f(l.wk.as_slice().expect("standard layout"));
            f(l.bk.as_slice().expect("standard layout"));
            f(l.wv.as_slice().expect("standard layout"));
            f(l.bv.as_slice().expect("standard layout"));
            f(l.wo.as_slice().expect("standard layout"));
            f(l.bo.as_slice().expect("standard layout"));
            f(l.ln1_gamma.as_slice().expect("standard layout"));
            f(l.ln1_beta.as_slice().expect("standard layout"));
            f(l.w1.as_slice().expect("standard layout"));
            f(l.b1.as_slice().expect("standard layout"));
            f(l.w2.as_slice().expect("standard layout"));
            f(l.b2.as_slice().expect("standard layout"));
            f(l.ln2_gamma.as_slice().expect("standard layout"));
            f(l.ln2_beta.as_slice().expect("standard layout"));
        }
        f(self.head.w_hidden.as_slice().expect("standard layout"));
        f(self.head.b_hidden.as_slice().expect("standard layout"));
        f(self.head.w_out.as_slice().expect("standard layout"));
        f(self.head.b_out.as_slice().expect("standard layout"));
    }

    fn for_each_tensor_mut(&mut self, f: &mut dyn FnMut(&mut [F])) {
        f(self.token_embed.as_slice_mut().expect("standard layout"));
        f(self.pos_embed.as_slice_mut().expect("standard layout"));
        f(self.emb_ln_gamma.as_slice_mut().expect("standard layout"));
        f(self.emb_ln_beta.as_slice_mut().expect("standard layout"));
        for l in &mut self.layers {
            f(l.wq.as_slice_mut().expect("standard layout"));
            f(l.bq.as_slice_mut().expect("standard layout"));
            f(l.wk.as_slice_mut().expect("standard layout"));
            f(l.bk.as_slice_mut().expect("standard layout"));
            f(l.wv.as_slice_mut().expect("standard layout"));
            f(l.bv.as_slice_mut().expect("standard layout"));
            f(l.wo.as_slice_mut().expect("standard layout"));
            f(l.bo.as_slice_mut().expect("standard layout"));
            f(l.ln1_gamma.as_slice_mut().expect("standard layout"));
            f(l.ln1_beta.as_slice_mut().expect("standard layout"));
            f(l.w1.as_slice_mut().expect("standard layout"));
            f(l.b1.as_slice_mut().expect("standard layout"));
            f(l.w2.as_slice_mut().expect("standard layout"));
            f(l.b2.as_slice_mut().expect("standard layout"));
            f(l.ln2_gamma.as_slice_mut().expect("standard layout"));
            f(l.ln2_beta.as_slice_mut().expect("standard layout"));
        }
        f(self.head.w_hidden.as_slice_mut().expect("standard layout"));
        f(self.head.b_hidden.as_slice_mut().expect("standard layout"));
        f(self.head.w_out.as_slice_mut().expect("standard layout"));
        f(self.head.b_out.as_slice_mut().expect("standard layout"));
    }

    /// Flatten all tensors in traversal order.
    pub fn to_flat(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.param_count());
        self.for_each_tensor(&mut |s| out.extend_from_slice(s));
        out
    }

    /// Append all tensors in traversal order to `out`.
    pub fn append_flat(&self, out: &mut Vec<F>) {
        self.for_each_tensor(&mut |s| out.extend_from_slice(s));
    }

    /// Overwrite all tensors from a flat buffer in traversal order.
    pub fn copy_from_flat(&mut self, flat: &[F]) {
        assert_eq!(flat.len(), self.param_count(), "flat length mismatch");
        let mut offset = 0usize;
        self.for_each_tensor_mut(&mut |s| {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        });
    }

    pub fn fill_zero(&mut self) {
        self.for_each_tensor_mut(&mut |s| s.fill(F::zero()));
    }

    /// Largest absolute element-wise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.to_flat();
        let b = other.to_flat();
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| (x.as_f64() - y.as_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_tensor(&mut |s| ok &= s.iter().all(|x| x.is_finite()));
        ok
    }
}

/// Initialize one parameter set: symmetric uniform scaled by fan-in for
/// weight matrices and embeddings, zeros for biases, ones for layer-norm
/// gains.
pub fn init_params<F: Real>(arch: &ArchConfig, seed: u64) -> Result<ModelParams<F>> {
    arch.validate()?;
    let mut rng = rng_for(seed, "model-init");
    let mut p = ModelParams::<F>::zeros(arch);

    let d = arch.d_model;
    uniform_fanin(&mut p.token_embed, d, &mut rng);
    uniform_fanin(&mut p.pos_embed, d, &mut rng);
    p.emb_ln_gamma.fill(F::one());
    for l in &mut p.layers {
        for w in [&mut l.wq, &mut l.wk, &mut l.wv, &mut l.wo] {
            uniform_fanin(w, d, &mut rng);
        }
        l.ln1_gamma.fill(F::one());
        uniform_fanin(&mut l.w1, d, &mut rng);
        uniform_fanin(&mut l.w2, arch.d_ff, &mut rng);
        l.ln2_gamma.fill(F::one());
    }
    uniform_fanin(&mut p.head.w_hidden, d, &mut rng);
    uniform_fanin_vec(&mut p.head.w_out, arch.head_hidden, &mut rng);
    Ok(p)
}

/// Initialize the siamese twins: both start from the exact same parameters.
pub fn init_siamese<F: Real>(
    arch: &ArchConfig,
    seed: u64,
) -> Result<(ModelParams<F>, ModelParams<F>)> {
    let history = init_params(arch, seed)?;
    let future = history.clone();
    Ok((history, future))
}

fn uniform_fanin<F: Real>(w: &mut Array2<F>, fan_in: usize, rng: &mut impl Rng) {
    let bound = 1.0 / (fan_in as f64).sqrt();
    for x in w.iter_mut() {
        *x = F::of_f64(rng.gen_range(-bound..bound));
    }
}

fn uniform_fanin_vec<F: Real>(w: &mut Array1<F>, fan_in: usize, rng: &mut impl Rng) {
    let bound = 1.0 / (fan_in as f64).sqrt();
    for x in w.iter_mut() {
        *x = F::of_f64(rng.gen_range(-bound..bound));
    }
}
