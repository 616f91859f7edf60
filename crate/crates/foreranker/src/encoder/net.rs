//! Encoder forward and backward passes.
//!
//! The forward pass embeds a marker-delimited token-id sequence, runs it
//! through post-norm self-attention layers, and maps the `[CLS]` position's
//! final representation through a small MLP to a scalar relevance score.
//! Trailing padding ids are stripped before any computation, so scores are
//! bit-identical with or without padding.
//!
//! The backward pass is hand-derived and accumulates parameter gradients into
//! a caller-provided [`ModelParams`] of the same shape, which lets one
//! gradient buffer serve a whole candidate list.

use ndarray::{s, Array1, Array2, Axis};

use super::params::{ArchConfig, LayerParams, ModelParams, Real};
use super::vocab::Vocabulary;
use crate::corpus::{
    serialize_future, serialize_history, BehaviorWindow, Document, SerializedInput,
};
use crate::error::{Error, Result};

const LN_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// Per-layer activations cached for the backward pass.
pub struct LayerCache<F> {
    h_in: Array2<F>,
    q: Array2<F>,
    k: Array2<F>,
    v: Array2<F>,
    attn: Vec<Array2<F>>,
    concat: Array2<F>,
    ln1: LnCache<F>,
    h1: Array2<F>,
    u: Array2<F>,
    g: Array2<F>,
    ln2: LnCache<F>,
    h2: Array2<F>,
}

struct LnCache<F> {
    xhat: Array2<F>,
    inv_std: Array1<F>,
}

/// Everything the backward pass needs from one forward evaluation.
pub struct ForwardCache<F> {
    ids: Vec<usize>,
    emb_ln: LnCache<F>,
    layers: Vec<LayerCache<F>>,
    cls_hidden: Array1<F>,
    pub score: F,
}

/// Forward pass over a serialized input. Returns the score and the
/// activation cache.
pub fn forward<F: Real>(
    params: &ModelParams<F>,
    input: &SerializedInput,
) -> Result<ForwardCache<F>> {
    let arch = &params.arch;
    // Trailing padding carries no information; positions beyond the last
    // non-pad token are dropped entirely.
    let mut len = input.token_ids.len();
    while len > 0 && input.token_ids[len - 1] == 0 {
        len -= 1;
    }
    if len == 0 {
        return Err(Error::input("cannot score an empty input sequence"));
    }
    if len > arch.max_len {
        return Err(Error::input(format!(
            "input length {len} exceeds the maximum {}",
            arch.max_len
        )));
    }
    let ids: Vec<usize> = input.token_ids[..len].iter().map(|&t| t as usize).collect();
    if let Some(&bad) = ids.iter().find(|&&t| t >= arch.vocab_size) {
        return Err(Error::input(format!(
            "token id {bad} outside vocabulary of size {}",
            arch.vocab_size
        )));
    }

    let d = arch.d_model;
    let mut raw = Array2::<F>::zeros((len, d));
    for (t, &id) in ids.iter().enumerate() {
        let row = &params.token_embed.row(id) + &params.pos_embed.row(t);
        raw.row_mut(t).assign(&row);
    }
    let (mut h, emb_ln) = layer_norm(&raw, &params.emb_ln_gamma, &params.emb_ln_beta);

    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let cache = layer_forward(layer, arch, h);
        h = cache.h2.clone();
        layers.push(cache);
    }

    let cls = h.row(0).to_owned();
    let pre = cls.dot(&params.head.w_hidden) + &params.head.b_hidden;
    let hidden = pre.mapv(|x| x.tanh());
    let score = hidden.dot(&params.head.w_out) + params.head.b_out[0];

    Ok(ForwardCache {
        ids,
        emb_ln,
        layers,
        cls_hidden: hidden,
        score,
    })
}

/// Score one serialized input.
pub fn encode_score<F: Real>(params: &ModelParams<F>, input: &SerializedInput) -> Result<F> {
    Ok(forward(params, input)?.score)
}

/// Score every candidate in a list against the same query and context.
/// Serialization is history-only when `future` is absent and
/// history-plus-future when present (even if the window is empty).
pub fn score_candidates<F: Real>(
    params: &ModelParams<F>,
    history: &BehaviorWindow,
    query: &[String],
    candidates: &[Document],
    future: Option<&BehaviorWindow>,
    vocab: &Vocabulary,
) -> Result<Vec<F>> {
    if candidates.is_empty() {
        return Err(Error::input("candidate list is empty"));
    }
    let max_len = params.arch.max_len;
    candidates
        .iter()
        .map(|doc| {
            let input = match future {
                None => serialize_history(history, query, &doc.tokens, vocab, max_len)?,
                Some(f) => serialize_future(history, query, &doc.tokens, f, vocab, max_len)?,
            };
            encode_score(params, &input)
        })
        .collect()
}

fn layer_forward<F: Real>(
    layer: &LayerParams<F>,
    arch: &ArchConfig,
    h_in: Array2<F>,
) -> LayerCache<F> {
    let len = h_in.nrows();
    let d = arch.d_model;
    let heads = arch.n_heads;
    let dh = d / heads;
    let scale = F::of_f64(1.0 / (dh as f64).sqrt());

    let q = h_in.dot(&layer.wq) + &layer.bq;
    let k = h_in.dot(&layer.wk) + &layer.bk;
    let v = h_in.dot(&layer.wv) + &layer.bv;

    let mut concat = Array2::<F>::zeros((len, d));
    let mut attn = Vec::with_capacity(heads);
    for m in 0..heads {
        let cols = s![.., m * dh..(m + 1) * dh];
        let qm = q.slice(cols);
        let km = k.slice(cols);
        let vm = v.slice(cols);
        let mut scores = qm.dot(&km.t());
        scores.mapv_inplace(|x| x * scale);
        let probs = softmax_rows(&scores);
        let out = probs.dot(&vm);
        concat.slice_mut(cols).assign(&out);
        attn.push(probs);
    }
    let attn_out = concat.dot(&layer.wo) + &layer.bo;

    let res1 = &h_in + &attn_out;
    let (h1, ln1) = layer_norm(&res1, &layer.ln1_gamma, &layer.ln1_beta);

    let u = h1.dot(&layer.w1) + &layer.b1;
    let g = u.mapv(gelu);
    let ff_out = g.dot(&layer.w2) + &layer.b2;

    let res2 = &h1 + &ff_out;
    let (h2, ln2) = layer_norm(&res2, &layer.ln2_gamma, &layer.ln2_beta);

    LayerCache {
        h_in,
        q,
        k,
        v,
        attn,
        concat,
        ln1,
        h1,
        u,
        g,
        ln2,
        h2,
    }
}

/// Backward pass: accumulate `d score / d params` scaled by `dscore` into
/// `grads`. `grads` must have the same shape as `params`.
pub fn backward<F: Real>(
    params: &ModelParams<F>,
    cache: &ForwardCache<F>,
    dscore: F,
    grads: &mut ModelParams<F>,
) {
    // Scoring head.
    let hidden = &cache.cls_hidden;
    let cls_in = cache
        .layers
        .last()
        .map(|l| l.h2.row(0).to_owned())
        .expect("at least one layer");

    for (g, &h) in grads.head.w_out.iter_mut().zip(hidden.iter()) {
        *g = *g + dscore * h;
    }
    grads.head.b_out[0] = grads.head.b_out[0] + dscore;

    // d pre = dscore * w_out ⊙ (1 - hidden^2)
    let dpre: Array1<F> = params
        .head
        .w_out
        .iter()
        .zip(hidden.iter())
        .map(|(&w, &h)| dscore * w * (F::one() - h * h))
        .collect();

    for (mut grow, &x) in grads.head.w_hidden.rows_mut().into_iter().zip(cls_in.iter()) {
        grow.zip_mut_with(&dpre.view(), |g, &dp| *g = *g + x * dp);
    }
    grads.head.b_hidden.zip_mut_with(&dpre, |g, &dp| *g = *g + dp);
    let dcls = params.head.w_hidden.dot(&dpre);

    let len = cache.ids.len();
    let d = params.arch.d_model;
    let mut dh = Array2::<F>::zeros((len, d));
    dh.row_mut(0).assign(&dcls);

    for li in (0..params.layers.len()).rev() {
        dh = layer_backward(
            &params.layers[li],
            &params.arch,
            &cache.layers[li],
            dh,
            &mut grads.layers[li],
        );
    }

    let draw = layer_norm_backward(
        &dh,
        &cache.emb_ln,
        &params.emb_ln_gamma,
        &mut grads.emb_ln_gamma,
        &mut grads.emb_ln_beta,
    );
    for (t, &id) in cache.ids.iter().enumerate() {
        let drow = draw.row(t);
        grads
            .token_embed
            .row_mut(id)
            .zip_mut_with(&drow, |g, &x| *g = *g + x);
        grads
            .pos_embed
            .row_mut(t)
            .zip_mut_with(&drow, |g, &x| *g = *g + x);
    }
}

fn layer_backward<F: Real>(
    layer: &LayerParams<F>,
    arch: &ArchConfig,
    cache: &LayerCache<F>,
    dh2: Array2<F>,
    grads: &mut LayerParams<F>,
) -> Array2<F> {
    let heads = arch.n_heads;
    let d = arch.d_model;
    let dh_dim = d / heads;
    let scale = F::of_f64(1.0 / (dh_dim as f64).sqrt());

    // LN2.
    let dres2 = layer_norm_backward(
        &dh2,
        &cache.ln2,
        &layer.ln2_gamma,
        &mut grads.ln2_gamma,
        &mut grads.ln2_beta,
    );

    // Feed-forward; dres2 splits into the skip path and the ff path.
    let dff = &dres2;
    add_matmul_t_a(&mut grads.w2, &cache.g, dff);
    add_colsum(&mut grads.b2, dff);
    let dg = dff.dot(&layer.w2.t());
    let du = ndarray::Zip::from(&dg)
        .and(&cache.u)
        .map_collect(|&dgi, &ui| dgi * gelu_deriv(ui));
    add_matmul_t_a(&mut grads.w1, &cache.h1, &du);
    add_colsum(&mut grads.b1, &du);
    let mut dh1 = du.dot(&layer.w1.t());
    dh1 = dh1 + &dres2;

    // LN1.
    let dres1 = layer_norm_backward(
        &dh1,
        &cache.ln1,
        &layer.ln1_gamma,
        &mut grads.ln1_gamma,
        &mut grads.ln1_beta,
    );

    // Attention output projection.
    let dattn_out = &dres1;
    add_matmul_t_a(&mut grads.wo, &cache.concat, dattn_out);
    add_colsum(&mut grads.bo, dattn_out);
    let dconcat = dattn_out.dot(&layer.wo.t());

    let mut dq = Array2::<F>::zeros(cache.q.raw_dim());
    let mut dk = Array2::<F>::zeros(cache.k.raw_dim());
    let mut dv = Array2::<F>::zeros(cache.v.raw_dim());
    for m in 0..heads {
        let cols = s![.., m * dh_dim..(m + 1) * dh_dim];
        let qm = cache.q.slice(cols);
        let km = cache.k.slice(cols);
        let vm = cache.v.slice(cols);
        let probs = &cache.attn[m];
        let dout = dconcat.slice(cols);

        let dprobs = dout.dot(&vm.t());
        dv.slice_mut(cols).assign(&probs.t().dot(&dout));

        // Row-wise softmax backward.
        let mut dscores = Array2::<F>::zeros(probs.raw_dim());
        for r in 0..probs.nrows() {
            let p = probs.row(r);
            let dp = dprobs.row(r);
            let dot = p.dot(&dp);
            let mut ds = dscores.row_mut(r);
            for j in 0..p.len() {
                ds[j] = p[j] * (dp[j] - dot);
            }
        }
        dscores.mapv_inplace(|x| x * scale);

        dq.slice_mut(cols).assign(&dscores.dot(&km));
        dk.slice_mut(cols).assign(&dscores.t().dot(&qm));
    }

    add_matmul_t_a(&mut grads.wq, &cache.h_in, &dq);
    add_colsum(&mut grads.bq, &dq);
    add_matmul_t_a(&mut grads.wk, &cache.h_in, &dk);
    add_colsum(&mut grads.bk, &dk);
    add_matmul_t_a(&mut grads.wv, &cache.h_in, &dv);
    add_colsum(&mut grads.bv, &dv);

    let mut dh_in = dq.dot(&layer.wq.t());
    dh_in = dh_in + dk.dot(&layer.wk.t());
    dh_in = dh_in + dv.dot(&layer.wv.t());
    dh_in = dh_in + &dres1;
    dh_in
}

fn softmax_rows<F: Real>(scores: &Array2<F>) -> Array2<F> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    out
}

fn layer_norm<F: Real>(
    x: &Array2<F>,
    gamma: &Array1<F>,
    beta: &Array1<F>,
) -> (Array2<F>, LnCache<F>) {
    let d = x.ncols();
    let inv_d = F::of_f64(1.0 / d as f64);
    let eps = F::of_f64(LN_EPS);
    let mut xhat = Array2::<F>::zeros(x.raw_dim());
    let mut inv_std = Array1::<F>::zeros(x.nrows());
    let mut out = Array2::<F>::zeros(x.raw_dim());
    for r in 0..x.nrows() {
        let row = x.row(r);
        let mean = row.sum() * inv_d;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).fold(F::zero(), |a, b| a + b) * inv_d;
        let istd = F::one() / (var + eps).sqrt();
        inv_std[r] = istd;
        let mut xh = xhat.row_mut(r);
        let mut o = out.row_mut(r);
        for j in 0..d {
            let norm = (row[j] - mean) * istd;
            xh[j] = norm;
            o[j] = gamma[j] * norm + beta[j];
        }
    }
    (out, LnCache { xhat, inv_std })
}

fn layer_norm_backward<F: Real>(
    dy: &Array2<F>,
    cache: &LnCache<F>,
    gamma: &Array1<F>,
    dgamma: &mut Array1<F>,
    dbeta: &mut Array1<F>,
) -> Array2<F> {
    let d = dy.ncols();
    let inv_d = F::of_f64(1.0 / d as f64);
    let mut dx = Array2::<F>::zeros(dy.raw_dim());
    for r in 0..dy.nrows() {
        let dy_r = dy.row(r);
        let xhat_r = cache.xhat.row(r);
        let istd = cache.inv_std[r];
        let mut m1 = F::zero();
        let mut m2 = F::zero();
        for j in 0..d {
            let dxh = dy_r[j] * gamma[j];
            m1 = m1 + dxh;
            m2 = m2 + dxh * xhat_r[j];
            dgamma[j] = dgamma[j] + dy_r[j] * xhat_r[j];
            dbeta[j] = dbeta[j] + dy_r[j];
        }
        m1 = m1 * inv_d;
        m2 = m2 * inv_d;
        let mut dx_r = dx.row_mut(r);
        for j in 0..d {
            let dxh = dy_r[j] * gamma[j];
            dx_r[j] = istd * (dxh - m1 - xhat_r[j] * m2);
        }
    }
    dx
}

/// `grad += a^T · b`
fn add_matmul_t_a<F: Real>(grad: &mut Array2<F>, a: &Array2<F>, b: &Array2<F>) {
    let update = a.t().dot(b);
    grad.zip_mut_with(&update, |g, &u| *g = *g + u);
}

/// `grad += column-wise sum of m`
fn add_colsum<F: Real>(grad: &mut Array1<F>, m: &Array2<F>) {
    let sums = m.sum_axis(Axis(0));
    grad.zip_mut_with(&sums, |g, &s| *g = *g + s);
}

fn gelu<F: Real>(x: F) -> F {
    let c = F::of_f64(GELU_C);
    let a = F::of_f64(GELU_A);
    let half = F::of_f64(0.5);
    let inner = c * (x + a * x * x * x);
    half * x * (F::one() + inner.tanh())
}

fn gelu_deriv<F: Real>(x: F) -> F {
    let c = F::of_f64(GELU_C);
    let a = F::of_f64(GELU_A);
    let half = F::of_f64(0.5);
    let three = F::of_f64(3.0);
    let inner = c * (x + a * x * x * x);
    let t = inner.tanh();
    half * (F::one() + t) + half * x * (F::one() - t * t) * c * (F::one() + three * a * x * x)
}

/// Dtype-erased scoring interface used by evaluation.
pub trait TurnScorer: Send + Sync {
    /// Score every candidate of one turn; history-only when `future` is
    /// absent, history-plus-future when present.
    fn score_turn(
        &self,
        history: &BehaviorWindow,
        query: &[String],
        candidates: &[Document],
        future: Option<&BehaviorWindow>,
    ) -> Result<Vec<f64>>;

    fn arch(&self) -> &ArchConfig;
    fn vocab(&self) -> &Vocabulary;
}
