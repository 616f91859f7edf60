//! The siamese optimization loop and its ablation modes.
//!
//! Mode `siamese` trains the two twins jointly: each step, every instance is
//! scored by both models, the gate picks the twin that ranked the clicked
//! document higher as teacher, the teacher trains on listwise NLL and the
//! student distills from the teacher's softmax distribution (blended with its
//! own NLL while the warm-up weight is above zero). The ablations:
//!
//! - `no_future`: the future-aware twin is never instantiated; the
//!   history-conditioned model trains on NLL alone.
//! - `no_peer`: classic two-phase distillation — train the future-aware model
//!   with gold labels, freeze it, then distill it into the history model.
//! - `no_gating`: both twins always receive `ω·NLL + (1-ω)·KL`; the gate is
//!   never consulted.
//!
//! Only the history-conditioned model (the ForeRanker) is the inference
//! artifact; the future-aware twin exists to generate training signal.
//!
//! Determinism: given `(config, corpus)` the whole run is a pure function of
//! the seed. Per-instance gradients inside a batch are computed in parallel
//! but reduced in instance order, so results are bit-stable. Each model's
//! backward pass reads only that model's parameters; the peer enters purely
//! through its captured score vector, which keeps the distillation targets
//! detached.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ranking_instances, RankingInstance, Session};
use crate::encoder::{
    forward, init_siamese, save_checkpoint, ArchConfig, ForwardCache, Model, ModelParams, Real,
    Vocabulary,
};
use crate::error::{Error, Result};
use crate::objectives::{
    combined_score_grads, gate_alpha, kl_divergence, kl_grad_wrt_scores, nll_grad, nll_loss,
    softmax_scores, warmup_weight, GateSignal, WarmupSchedule,
};
use crate::seeding::rng_for;

pub use crate::encoder::load_checkpoint;

/// Training regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    Siamese,
    NoFuture,
    NoPeer,
    NoGating,
}

impl std::str::FromStr for TrainMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "siamese" => Ok(TrainMode::Siamese),
            "no-future" => Ok(TrainMode::NoFuture),
            "no-peer" => Ok(TrainMode::NoPeer),
            "no-gating" => Ok(TrainMode::NoGating),
            other => Err(Error::input(format!(
                "unknown mode {other}; expected siamese, no-future, no-peer, or no-gating"
            ))),
        }
    }
}

impl std::fmt::Display for TrainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TrainMode::Siamese => "siamese",
            TrainMode::NoFuture => "no-future",
            TrainMode::NoPeer => "no-peer",
            TrainMode::NoGating => "no-gating",
        };
        write!(f, "{name}")
    }
}

/// Everything a training run needs besides the corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Warm-up steps; `None` means one epoch's worth of steps.
    pub warmup_steps: Option<u64>,
    pub warmup_power: f64,
    /// Future-turn budget `k` for the future-aware model's input.
    pub future_budget: usize,
    pub seed: u64,
    pub max_len: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub head_hidden: usize,

    /// Test hook: pin the gate to a fixed value.
    #[serde(skip)]
    pub hook_force_alpha: Option<GateSignal>,
    /// Test hook: the history model trains on pure NLL regardless of mode.
    #[serde(skip)]
    pub hook_disable_kl: bool,
    /// Test hook: never apply optimizer updates to the future-aware model.
    #[serde(skip)]
    pub hook_freeze_future: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::Siamese,
            epochs: 5,
            batch_size: 32,
            learning_rate: 1e-3,
            weight_decay: 0.01,
            warmup_steps: None,
            warmup_power: 1.0,
            future_budget: 2,
            seed: 0,
            max_len: 128,
            d_model: 64,
            n_layers: 2,
            n_heads: 2,
            d_ff: 128,
            head_hidden: 64,
            hook_force_alpha: None,
            hook_disable_kl: false,
            hook_freeze_future: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::input("batch_size must be > 0"));
        }
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::input("learning_rate must be finite and >= 0"));
        }
        if self.warmup_power <= 0.0 || !self.warmup_power.is_finite() {
            return Err(Error::input("warmup_power must be > 0"));
        }
        Ok(())
    }

    pub fn arch_for_vocab(&self, vocab_size: usize) -> ArchConfig {
        ArchConfig {
            vocab_size,
            max_len: self.max_len,
            d_model: self.d_model,
            n_layers: self.n_layers,
            n_heads: self.n_heads,
            d_ff: self.d_ff,
            head_hidden: self.head_hidden,
        }
    }
}

/// One training step's reported losses, written as one JSONL record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub loss_f: Option<f64>,
    pub loss_h: Option<f64>,
    pub nll_f: Option<f64>,
    pub nll_h: Option<f64>,
    pub kl_f: Option<f64>,
    pub kl_h: Option<f64>,
    pub alpha_rate: Option<f64>,
    pub omega: f64,
}

/// Step log plus run-level counters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: TrainMode,
    pub steps: Vec<StepRecord>,
    pub skipped_instances: usize,
    /// Mean teacher-gate rate over steps (siamese mode only).
    pub mean_alpha: Option<f64>,
}

/// Result of a training run. `future` is absent in `no_future` mode.
pub struct TrainOutcome<F> {
    pub foreranker: Model<F>,
    pub future: Option<Model<F>>,
    pub report: TrainReport,
}

impl<F: Real> TrainOutcome<F> {
    /// Write the checkpoints this run produced. Returns the ForeRanker path
    /// and the future-model path when one was written.
    pub fn save_checkpoints(
        &self,
        out_dir: &std::path::Path,
    ) -> Result<(std::path::PathBuf, Option<std::path::PathBuf>)> {
        let fore = out_dir.join("foreranker.ckpt");
        save_checkpoint(&self.foreranker.params, &self.foreranker.vocab, &fore)?;
        let fut = match &self.future {
            Some(model) => {
                let path = out_dir.join("future.ckpt");
                save_checkpoint(&model.params, &model.vocab, &path)?;
                Some(path)
            }
            None => None,
        };
        Ok((fore, fut))
    }
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

/// Adam with decoupled weight decay and a linear learning-rate decay over the
/// run.
pub struct AdamW<F> {
    lr0: f64,
    weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    total_steps: u64,
    t: u64,
    m: Vec<F>,
    v: Vec<F>,
    scratch: Vec<F>,
}

impl<F: Real> AdamW<F> {
    pub fn new(param_count: usize, lr0: f64, weight_decay: f64, total_steps: u64) -> Self {
        AdamW {
            lr0,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            total_steps,
            t: 0,
            m: vec![F::zero(); param_count],
            v: vec![F::zero(); param_count],
            scratch: Vec::with_capacity(param_count),
        }
    }

    fn lr_now(&self) -> f64 {
        if self.total_steps == 0 {
            return self.lr0;
        }
        let frac = 1.0 - self.t as f64 / self.total_steps as f64;
        self.lr0 * frac.max(0.0)
    }

    /// Apply one update from a flat gradient.
    pub fn step(&mut self, params: &mut ModelParams<F>, grad: &[F]) {
        assert_eq!(grad.len(), self.m.len(), "gradient length mismatch");
        let lr = F::of_f64(self.lr_now());
        self.t += 1;
        let b1 = F::of_f64(self.beta1);
        let b2 = F::of_f64(self.beta2);
        let one = F::one();
        let eps = F::of_f64(self.eps);
        let bc1 = F::of_f64(1.0 - self.beta1.powi(self.t as i32));
        let bc2 = F::of_f64(1.0 - self.beta2.powi(self.t as i32));
        let wd = F::of_f64(self.weight_decay);

        self.scratch.clear();
        params.append_flat(&mut self.scratch);
        for i in 0..grad.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            let p = self.scratch[i];
            self.scratch[i] = p - lr * (m_hat / (v_hat.sqrt() + eps) + wd * p);
        }
        params.copy_from_flat(&self.scratch);
    }
}

// ---------------------------------------------------------------------------
// Instance-level computation
// ---------------------------------------------------------------------------

fn forward_side<F: Real>(
    params: &ModelParams<F>,
    inst: &RankingInstance,
    with_future: bool,
    vocab: &Vocabulary,
) -> Result<(Vec<f64>, Vec<ForwardCache<F>>)> {
    let max_len = params.arch.max_len;
    let mut scores = Vec::with_capacity(inst.candidates.len());
    let mut caches = Vec::with_capacity(inst.candidates.len());
    for doc in &inst.candidates {
        let input = if with_future {
            crate::corpus::serialize_future(
                &inst.history,
                &inst.query,
                &doc.tokens,
                &inst.future,
                vocab,
                max_len,
            )?
        } else {
            crate::corpus::serialize_history(
                &inst.history,
                &inst.query,
                &doc.tokens,
                vocab,
                max_len,
            )?
        };
        let cache = forward(params, &input)?;
        scores.push(cache.score.as_f64());
        caches.push(cache);
    }
    Ok((scores, caches))
}

/// Backpropagate `d loss / d score` through every candidate's cache.
pub(crate) fn backprop_scores<F: Real>(
    params: &ModelParams<F>,
    caches: &[ForwardCache<F>],
    dscores: &[f64],
) -> ModelParams<F> {
    let mut grads = ModelParams::<F>::zeros(&params.arch);
    for (cache, &ds) in caches.iter().zip(dscores) {
        crate::encoder::backward(params, cache, F::of_f64(ds), &mut grads);
    }
    grads
}

#[derive(Default, Clone, Copy)]
struct StepStats {
    nll_f: Option<f64>,
    nll_h: Option<f64>,
    kl_f: Option<f64>,
    kl_h: Option<f64>,
    loss_f: Option<f64>,
    loss_h: Option<f64>,
    alpha: Option<f64>,
}

struct InstanceGrads<F> {
    grad_h: Option<Vec<F>>,
    grad_f: Option<Vec<F>>,
    stats: StepStats,
}

/// Per-instance loss gradients for the joint modes.
fn instance_grads<F: Real>(
    config: &TrainConfig,
    params_h: &ModelParams<F>,
    params_f: Option<&ModelParams<F>>,
    inst: &RankingInstance,
    vocab: &Vocabulary,
    omega: f64,
) -> Result<InstanceGrads<F>> {
    let positive = inst
        .positive_index
        .expect("training instances carry a positive");
    let (scores_h, caches_h) = forward_side(params_h, inst, false, vocab)?;

    let Some(params_f) = params_f else {
        // Pure NLL on the history model.
        let nll_h = nll_loss(&scores_h, positive)?;
        let dscores = nll_grad(&scores_h, positive)?;
        let grad_h = backprop_scores(params_h, &caches_h, &dscores);
        return Ok(InstanceGrads {
            grad_h: Some(grad_h.to_flat()),
            grad_f: None,
            stats: StepStats {
                nll_h: Some(nll_h),
                loss_h: Some(nll_h),
                ..StepStats::default()
            },
        });
    };

    let (scores_f, caches_f) = forward_side(params_f, inst, true, vocab)?;
    let p_h = softmax_scores(&scores_h)?;
    let p_f = softmax_scores(&scores_f)?;
    let nll_f = nll_loss(&scores_f, positive)?;
    let nll_h = nll_loss(&scores_h, positive)?;
    let kl_f = kl_divergence(&p_h, &p_f)?;
    let kl_h = kl_divergence(&p_f, &p_h)?;

    let (dscores_f, dscores_h, stats) = match config.mode {
        TrainMode::Siamese => {
            let alpha = match config.hook_force_alpha {
                Some(forced) => forced,
                None => gate_alpha(scores_f[positive], scores_h[positive])?,
            };
            let (loss_f, loss_h) =
                crate::objectives::combined_losses(alpha, nll_f, kl_f, nll_h, kl_h, omega);
            let (df, dh) = combined_score_grads(alpha, &scores_f, &scores_h, positive, omega)?;
            (
                df,
                dh,
                StepStats {
                    nll_f: Some(nll_f),
                    nll_h: Some(nll_h),
                    kl_f: Some(kl_f),
                    kl_h: Some(kl_h),
                    loss_f: Some(loss_f),
                    loss_h: Some(loss_h),
                    alpha: Some(alpha.indicator()),
                },
            )
        }
        TrainMode::NoGating => {
            let mix = |nll_g: Vec<f64>, kl_g: Vec<f64>| -> Vec<f64> {
                nll_g
                    .iter()
                    .zip(&kl_g)
                    .map(|(&a, &b)| omega * a + (1.0 - omega) * b)
                    .collect()
            };
            let dh = mix(
                nll_grad(&scores_h, positive)?,
                kl_grad_wrt_scores(&p_f, &scores_h)?,
            );
            let df = mix(
                nll_grad(&scores_f, positive)?,
                kl_grad_wrt_scores(&p_h, &scores_f)?,
            );
            (
                df,
                dh,
                StepStats {
                    nll_f: Some(nll_f),
                    nll_h: Some(nll_h),
                    kl_f: Some(kl_f),
                    kl_h: Some(kl_h),
                    loss_f: Some(omega * nll_f + (1.0 - omega) * kl_f),
                    loss_h: Some(omega * nll_h + (1.0 - omega) * kl_h),
                    alpha: None,
                },
            )
        }
        TrainMode::NoFuture | TrainMode::NoPeer => {
            return Err(Error::input("mode is not handled by the joint loop"))
        }
    };

    let (dscores_h, stats) = if config.hook_disable_kl {
        let mut s = stats;
        s.loss_h = Some(nll_h);
        (nll_grad(&scores_h, positive)?, s)
    } else {
        (dscores_h, stats)
    };

    let grad_h = backprop_scores(params_h, &caches_h, &dscores_h);
    let grad_f = backprop_scores(params_f, &caches_f, &dscores_f);
    Ok(InstanceGrads {
        grad_h: Some(grad_h.to_flat()),
        grad_f: Some(grad_f.to_flat()),
        stats,
    })
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

/// Training instances (turns with a positive), plus the skipped count.
pub fn training_set(corpus: &[Session], future_budget: usize) -> (Vec<RankingInstance>, usize) {
    let all = ranking_instances(corpus, future_budget);
    let total = all.len();
    let usable: Vec<RankingInstance> = all
        .into_iter()
        .filter(|i| i.positive_index.is_some())
        .collect();
    let skipped = total - usable.len();
    (usable, skipped)
}

fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(seed, &format!("shuffle/epoch/{epoch}"));
    order.shuffle(&mut rng);
    order
}

fn check_finite(record: &StepRecord) -> Result<()> {
    for (name, v) in [
        ("loss_f", record.loss_f),
        ("loss_h", record.loss_h),
        ("nll_f", record.nll_f),
        ("nll_h", record.nll_h),
        ("kl_f", record.kl_f),
        ("kl_h", record.kl_h),
    ] {
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(Error::numeric(format!(
                    "{name} became non-finite at step {}",
                    record.step
                )));
            }
        }
    }
    Ok(())
}

fn mean_of(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

fn average_flat<'a, F: Real>(grads: impl Iterator<Item = &'a [F]>, len: usize) -> Vec<F> {
    let mut sum = vec![F::zero(); len];
    let mut n = 0usize;
    for g in grads {
        for (s, &x) in sum.iter_mut().zip(g) {
            *s = *s + x;
        }
        n += 1;
    }
    let scale = F::of_f64(1.0 / n.max(1) as f64);
    for s in &mut sum {
        *s = *s * scale;
    }
    sum
}

struct RunSetup<F: Real> {
    vocab: Vocabulary,
    arch: ArchConfig,
    instances: Vec<RankingInstance>,
    skipped: usize,
    steps_per_epoch: u64,
    total_steps: u64,
    param_len: usize,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Real> RunSetup<F> {
    fn prepare(config: &TrainConfig, corpus: &[Session]) -> Result<Self> {
        let vocab = Vocabulary::from_corpus(corpus);
        let arch = config.arch_for_vocab(vocab.len());
        arch.validate()?;
        let (instances, skipped) = training_set(corpus, config.future_budget);
        if instances.is_empty() {
            return Err(Error::input(
                "training set is empty after filtering clickless turns",
            ));
        }
        let steps_per_epoch = instances.len().div_ceil(config.batch_size) as u64;
        let total_steps = steps_per_epoch * config.epochs as u64;
        let param_len = ModelParams::<F>::zeros(&arch).param_count();
        Ok(RunSetup {
            vocab,
            arch,
            instances,
            skipped,
            steps_per_epoch,
            total_steps,
            param_len,
            _marker: std::marker::PhantomData,
        })
    }

    fn optimizer(&self, config: &TrainConfig) -> AdamW<F> {
        AdamW::new(
            self.param_len,
            config.learning_rate,
            config.weight_decay,
            self.total_steps,
        )
    }

    fn warmup(&self, config: &TrainConfig) -> WarmupSchedule {
        WarmupSchedule {
            total_steps: config.warmup_steps.unwrap_or(self.steps_per_epoch),
            power: config.warmup_power,
        }
    }

    fn batches(&self, epoch: usize, config: &TrainConfig) -> Vec<Vec<&RankingInstance>> {
        let order = epoch_order(self.instances.len(), config.seed, epoch);
        order
            .chunks(config.batch_size)
            .map(|chunk| chunk.iter().map(|&i| &self.instances[i]).collect())
            .collect()
    }
}

/// Train in any mode. Returns the ForeRanker, the future-aware twin when the
/// mode instantiates one, and the step log.
pub fn train<F: Real>(config: &TrainConfig, corpus: &[Session]) -> Result<TrainOutcome<F>> {
    config.validate()?;
    match config.mode {
        TrainMode::NoPeer => train_no_peer(config, corpus),
        _ => train_joint(config, corpus),
    }
}

/// Mutual distillation without the gate: both twins always train on
/// `ω·NLL + (1-ω)·KL`.
pub fn train_no_gating<F: Real>(
    config: &TrainConfig,
    corpus: &[Session],
) -> Result<TrainOutcome<F>> {
    let mut config = config.clone();
    config.mode = TrainMode::NoGating;
    train_joint(&config, corpus)
}

/// Joint loop for `siamese`, `no_future`, and `no_gating`.
fn train_joint<F: Real>(config: &TrainConfig, corpus: &[Session]) -> Result<TrainOutcome<F>> {
    config.validate()?;
    let setup = RunSetup::<F>::prepare(config, corpus)?;
    let (mut params_h, init_f) = init_siamese::<F>(&setup.arch, config.seed)?;
    let with_future = config.mode != TrainMode::NoFuture;
    let mut params_f = with_future.then_some(init_f);

    let mut opt_h = setup.optimizer(config);
    let mut opt_f = setup.optimizer(config);
    let schedule = setup.warmup(config);

    let mut steps = Vec::new();
    let mut step_no = 0u64;
    for epoch in 0..config.epochs {
        for batch in setup.batches(epoch, config) {
            let omega = warmup_weight(step_no, &schedule);
            let results: Result<Vec<InstanceGrads<F>>> = batch
                .par_iter()
                .map(|inst| {
                    instance_grads(
                        config,
                        &params_h,
                        params_f.as_ref(),
                        inst,
                        &setup.vocab,
                        omega,
                    )
                })
                .collect();
            let results = results?;

            let grad_h = average_flat(
                results.iter().filter_map(|r| r.grad_h.as_deref()),
                setup.param_len,
            );
            opt_h.step(&mut params_h, &grad_h);

            if let Some(pf) = params_f.as_mut() {
                let grad_f = average_flat(
                    results.iter().filter_map(|r| r.grad_f.as_deref()),
                    setup.param_len,
                );
                if !config.hook_freeze_future {
                    opt_f.step(pf, &grad_f);
                }
            }

            let collect = |pick: fn(&StepStats) -> Option<f64>| -> Vec<Option<f64>> {
                results.iter().map(|r| pick(&r.stats)).collect()
            };
            let record = StepRecord {
                step: step_no,
                loss_f: mean_of(&collect(|s| s.loss_f)),
                loss_h: mean_of(&collect(|s| s.loss_h)),
                nll_f: mean_of(&collect(|s| s.nll_f)),
                nll_h: mean_of(&collect(|s| s.nll_h)),
                kl_f: mean_of(&collect(|s| s.kl_f)),
                kl_h: mean_of(&collect(|s| s.kl_h)),
                alpha_rate: mean_of(&collect(|s| s.alpha)),
                omega,
            };
            check_finite(&record)?;
            steps.push(record);
            step_no += 1;
        }
    }

    let mean_alpha = if config.mode == TrainMode::Siamese {
        let rates: Vec<Option<f64>> = steps.iter().map(|s| s.alpha_rate).collect();
        mean_of(&rates)
    } else {
        None
    };

    Ok(TrainOutcome {
        foreranker: Model {
            params: params_h,
            vocab: setup.vocab.clone(),
        },
        future: params_f.map(|params| Model {
            params,
            vocab: setup.vocab.clone(),
        }),
        report: TrainReport {
            mode: config.mode,
            steps,
            skipped_instances: setup.skipped,
            mean_alpha,
        },
    })
}

/// Classic two-phase distillation: train the future-aware model with NLL,
/// freeze it, then train the history model against its distributions (with
/// the warm-up-scheduled NLL blend).
pub fn train_no_peer<F: Real>(config: &TrainConfig, corpus: &[Session]) -> Result<TrainOutcome<F>> {
    let mut config = config.clone();
    config.mode = TrainMode::NoPeer;
    config.validate()?;
    let setup = RunSetup::<F>::prepare(&config, corpus)?;
    let (mut params_h, mut params_f) = init_siamese::<F>(&setup.arch, config.seed)?;
    let mut steps = Vec::new();
    let mut step_no = 0u64;

    // Phase 1: the future-aware model alone, gold labels only.
    let mut opt_f = setup.optimizer(&config);
    for epoch in 0..config.epochs {
        for batch in setup.batches(epoch, &config) {
            let results: Result<Vec<(Vec<F>, f64)>> = batch
                .par_iter()
                .map(|inst| {
                    let positive = inst.positive_index.expect("filtered");
                    let (scores_f, caches_f) = forward_side(&params_f, inst, true, &setup.vocab)?;
                    let nll = nll_loss(&scores_f, positive)?;
                    let d = nll_grad(&scores_f, positive)?;
                    Ok((backprop_scores(&params_f, &caches_f, &d).to_flat(), nll))
                })
                .collect();
            let results = results?;
            let grad = average_flat(results.iter().map(|(g, _)| g.as_slice()), setup.param_len);
            let nll_mean = results.iter().map(|(_, l)| l).sum::<f64>() / results.len() as f64;
            opt_f.step(&mut params_f, &grad);
            let record = StepRecord {
                step: step_no,
                loss_f: Some(nll_mean),
                loss_h: None,
                nll_f: Some(nll_mean),
                nll_h: None,
                kl_f: None,
                kl_h: None,
                alpha_rate: None,
                omega: 1.0,
            };
            check_finite(&record)?;
            steps.push(record);
            step_no += 1;
        }
    }

    // Phase 2: frozen teacher, history-model student.
    let mut opt_h = setup.optimizer(&config);
    let schedule = setup.warmup(&config);
    let mut phase2_step = 0u64;
    for epoch in 0..config.epochs {
        for batch in setup.batches(epoch, &config) {
            let omega = warmup_weight(phase2_step, &schedule);
            let results: Result<Vec<(Vec<F>, f64, f64, f64)>> = batch
                .par_iter()
                .map(|inst| {
                    let positive = inst.positive_index.expect("filtered");
                    let (scores_h, caches_h) = forward_side(&params_h, inst, false, &setup.vocab)?;
                    let (scores_f, _) = forward_side(&params_f, inst, true, &setup.vocab)?;
                    let p_f = softmax_scores(&scores_f)?;
                    let nll_h = nll_loss(&scores_h, positive)?;
                    let kl_h = kl_divergence(&p_f, &softmax_scores(&scores_h)?)?;
                    let nll_g = nll_grad(&scores_h, positive)?;
                    let kl_g = kl_grad_wrt_scores(&p_f, &scores_h)?;
                    let d: Vec<f64> = nll_g
                        .iter()
                        .zip(&kl_g)
                        .map(|(&a, &b)| omega * a + (1.0 - omega) * b)
                        .collect();
                    let loss_h = omega * nll_h + (1.0 - omega) * kl_h;
                    Ok((
                        backprop_scores(&params_h, &caches_h, &d).to_flat(),
                        nll_h,
                        kl_h,
                        loss_h,
                    ))
                })
                .collect();
            let results = results?;
            let grad = average_flat(results.iter().map(|(g, ..)| g.as_slice()), setup.param_len);
            let n = results.len() as f64;
            opt_h.step(&mut params_h, &grad);
            let record = StepRecord {
                step: step_no,
                loss_f: None,
                loss_h: Some(results.iter().map(|r| r.3).sum::<f64>() / n),
                nll_f: None,
                nll_h: Some(results.iter().map(|r| r.1).sum::<f64>() / n),
                kl_f: None,
                kl_h: Some(results.iter().map(|r| r.2).sum::<f64>() / n),
                alpha_rate: None,
                omega,
            };
            check_finite(&record)?;
            steps.push(record);
            step_no += 1;
            phase2_step += 1;
        }
    }

    Ok(TrainOutcome {
        foreranker: Model {
            params: params_h,
            vocab: setup.vocab.clone(),
        },
        future: Some(Model {
            params: params_f,
            vocab: setup.vocab,
        }),
        report: TrainReport {
            mode: TrainMode::NoPeer,
            steps,
            skipped_instances: setup.skipped,
            mean_alpha: None,
        },
    })
}
