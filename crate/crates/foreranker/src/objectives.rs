//! Training objectives and analytic quantities: softmax relevance
//! distributions, listwise NLL, KL distillation, the teacher gate, warm-up
//! weights, label smoothing, smoothed cross-entropy, and entropy.
//!
//! Everything here is a pure function over `f64` score or probability
//! vectors; natural logarithms throughout, softmax at temperature 1. Score
//! gradients are provided alongside each loss so the trainer can backpropagate
//! without an autodiff tape: for every loss in this module the gradient with
//! respect to the scores is `softmax(scores) - target`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability distribution over one query's candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceDistribution(Vec<f64>);

impl RelevanceDistribution {
    /// Validate probabilities: entries in `[0, 1]`, summing to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::input("distribution must be non-empty"));
        }
        if probs.iter().any(|&p| !p.is_finite() || !(0.0..=1.0).contains(&p)) {
            return Err(Error::numeric(
                "distribution entries must be finite and in [0, 1]",
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::numeric(format!(
                "distribution sums to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(RelevanceDistribution(probs))
    }

    /// One-hot distribution at `index`.
    pub fn one_hot(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::input(format!(
                "one-hot index {index} out of range for length {len}"
            )));
        }
        let mut p = vec![0.0; len];
        p[index] = 1.0;
        Ok(RelevanceDistribution(p))
    }

    /// Uniform distribution over `len` candidates.
    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::input("distribution must be non-empty"));
        }
        Ok(RelevanceDistribution(vec![1.0 / len as f64; len]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Max-shifted softmax over ranking scores.
pub fn softmax_scores(scores: &[f64]) -> Result<RelevanceDistribution> {
    if scores.is_empty() {
        return Err(Error::input("cannot softmax an empty score vector"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::numeric("softmax input contains non-finite scores"));
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    // Extreme spreads can underflow individual terms to zero; keep the
    // distribution strictly positive so downstream logs stay finite.
    let probs = exps
        .iter()
        .map(|&e| (e / sum).max(f64::MIN_POSITIVE))
        .collect();
    Ok(RelevanceDistribution(probs))
}

/// Listwise negative log likelihood of the positive candidate.
pub fn nll_loss(scores: &[f64], positive_index: usize) -> Result<f64> {
    if positive_index >= scores.len() {
        return Err(Error::input(format!(
            "positive index {positive_index} out of range for {} candidates",
            scores.len()
        )));
    }
    let dist = softmax_scores(scores)?;
    Ok(-dist.probs()[positive_index].ln())
}

/// Gradient of [`nll_loss`] with respect to the scores:
/// `softmax(scores) - one_hot(positive)`.
pub fn nll_grad(scores: &[f64], positive_index: usize) -> Result<Vec<f64>> {
    if positive_index >= scores.len() {
        return Err(Error::input(format!(
            "positive index {positive_index} out of range for {} candidates",
            scores.len()
        )));
    }
    let dist = softmax_scores(scores)?;
    Ok(dist
        .probs()
        .iter()
        .enumerate()
        .map(|(j, &p)| p - if j == positive_index { 1.0 } else { 0.0 })
        .collect())
}

/// `KL(target || approx) = Σ target · ln(target / approx)` with
/// `0 · ln 0 = 0`. `approx` must be strictly positive.
pub fn kl_divergence(
    target: &RelevanceDistribution,
    approx: &RelevanceDistribution,
) -> Result<f64> {
    if target.len() != approx.len() {
        return Err(Error::input(format!(
            "KL length mismatch: {} vs {}",
            target.len(),
            approx.len()
        )));
    }
    if approx.probs().iter().any(|&p| p <= 0.0) {
        return Err(Error::input("KL approx distribution must be strictly positive"));
    }
    let kl = target
        .probs()
        .iter()
        .zip(approx.probs())
        .map(|(&t, &a)| if t == 0.0 { 0.0 } else { t * (t / a).ln() })
        .sum::<f64>();
    // Rounding can leave a tiny negative residue when the inputs coincide.
    Ok(kl.max(0.0))
}

/// Gradient of `KL(target || softmax(scores))` with respect to the scores:
/// `softmax(scores) - target`, treating `target` as a constant.
pub fn kl_grad_wrt_scores(
    target: &RelevanceDistribution,
    scores: &[f64],
) -> Result<Vec<f64>> {
    if target.len() != scores.len() {
        return Err(Error::input(format!(
            "KL length mismatch: {} vs {}",
            target.len(),
            scores.len()
        )));
    }
    let dist = softmax_scores(scores)?;
    Ok(dist
        .probs()
        .iter()
        .zip(target.probs())
        .map(|(&p, &t)| p - t)
        .collect())
}

/// Which twin teaches this instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSignal {
    /// The future-aware model scored the positive higher: it teaches
    /// (`α = 1`).
    FutureTeacher,
    /// Otherwise, the history-conditioned model teaches (`α = 0`).
    HistoryTeacher,
}

impl GateSignal {
    /// The 0/1 indicator value `α`.
    pub fn indicator(self) -> f64 {
        match self {
            GateSignal::FutureTeacher => 1.0,
            GateSignal::HistoryTeacher => 0.0,
        }
    }
}

/// Gate on the raw positive-candidate scores: the future-aware model becomes
/// teacher only when it scores the positive strictly higher; ties keep the
/// history model as teacher.
pub fn gate_alpha(s_f_pos: f64, s_h_pos: f64) -> Result<GateSignal> {
    if !s_f_pos.is_finite() || !s_h_pos.is_finite() {
        return Err(Error::numeric("gate inputs must be finite"));
    }
    Ok(if s_f_pos > s_h_pos {
        GateSignal::FutureTeacher
    } else {
        GateSignal::HistoryTeacher
    })
}

/// Warm-up schedule for the student's loss mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupSchedule {
    /// Total warm-up steps `T`.
    pub total_steps: u64,
    /// Polynomial decay power `p`.
    pub power: f64,
}

impl WarmupSchedule {
    pub fn new(total_steps: u64, power: f64) -> Result<Self> {
        if power <= 0.0 || !power.is_finite() {
            return Err(Error::input("warm-up power must be positive and finite"));
        }
        Ok(WarmupSchedule { total_steps, power })
    }
}

/// Polynomially decaying mixing weight `ω(t) = (1 - min(t, T)/T)^p`; a zero
/// warm-up length means `ω = 0` everywhere.
pub fn warmup_weight(step: u64, schedule: &WarmupSchedule) -> f64 {
    if schedule.total_steps == 0 {
        return 0.0;
    }
    let t = step.min(schedule.total_steps) as f64;
    let frac = 1.0 - t / schedule.total_steps as f64;
    frac.powf(schedule.power)
}

/// Compose the per-instance losses of the siamese twins.
///
/// The teacher trains on its own NLL; the student trains on KL against the
/// teacher's distribution, blended with its own NLL by the warm-up weight:
/// student loss = `ω · NLL + (1 - ω) · KL`. Which side is which follows the
/// gate: `α = 1` makes the future-aware model the teacher.
pub fn combined_losses(
    alpha: GateSignal,
    nll_f: f64,
    kl_f: f64,
    nll_h: f64,
    kl_h: f64,
    omega: f64,
) -> (f64, f64) {
    let a = alpha.indicator();
    let student_f = omega * nll_f + (1.0 - omega) * kl_f;
    let student_h = omega * nll_h + (1.0 - omega) * kl_h;
    let loss_f = a * nll_f + (1.0 - a) * student_f;
    let loss_h = (1.0 - a) * nll_h + a * student_h;
    (loss_f, loss_h)
}

/// Gradients of [`combined_losses`] with respect to each model's scores,
/// with the peer's distribution treated as a constant.
pub fn combined_score_grads(
    alpha: GateSignal,
    scores_f: &[f64],
    scores_h: &[f64],
    positive_index: usize,
    omega: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p_f = softmax_scores(scores_f)?;
    let p_h = softmax_scores(scores_h)?;
    let a = alpha.indicator();

    let grad = |own: &RelevanceDistribution, peer: &RelevanceDistribution, weight_nll: f64| {
        // weight_nll · (p - onehot) + weight_kl · (p - peer)
        let weight_kl = 1.0 - weight_nll;
        own.probs()
            .iter()
            .zip(peer.probs())
            .enumerate()
            .map(|(j, (&p, &q))| {
                let onehot = if j == positive_index { 1.0 } else { 0.0 };
                weight_nll * (p - onehot) + weight_kl * (p - q)
            })
            .collect::<Vec<f64>>()
    };

    // Teacher weight on NLL is 1; the student's NLL weight is ω.
    let nll_weight_f = a + (1.0 - a) * omega;
    let nll_weight_h = (1.0 - a) + a * omega;
    Ok((
        grad(&p_f, &p_h, nll_weight_f),
        grad(&p_h, &p_f, nll_weight_h),
    ))
}

/// Mix one-hot click labels with a uniform distribution:
/// `y' = y·(1-γ) + γ/N`.
pub fn label_smooth_targets(labels: &[bool], gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::input("gamma must be in [0, 1)"));
    }
    if labels.iter().filter(|&&y| y).count() != 1 {
        return Err(Error::input(
            "label smoothing expects exactly one positive label",
        ));
    }
    let n = labels.len() as f64;
    Ok(labels
        .iter()
        .map(|&y| if y { 1.0 - gamma + gamma / n } else { gamma / n })
        .collect())
}

/// Cross-entropy between smoothed targets and `softmax(scores)`.
pub fn smoothed_ce_loss(scores: &[f64], targets: &[f64]) -> Result<f64> {
    if scores.len() != targets.len() {
        return Err(Error::input(format!(
            "length mismatch: {} scores vs {} targets",
            scores.len(),
            targets.len()
        )));
    }
    let sum: f64 = targets.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!(
            "targets sum to {sum}, expected 1"
        )));
    }
    let dist = softmax_scores(scores)?;
    Ok(targets
        .iter()
        .zip(dist.probs())
        .map(|(&t, &p)| if t == 0.0 { 0.0 } else { -t * p.ln() })
        .sum())
}

/// Gradient of [`smoothed_ce_loss`]: `softmax(scores) - targets`.
pub fn smoothed_ce_grad(scores: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    if scores.len() != targets.len() {
        return Err(Error::input("length mismatch"));
    }
    let dist = softmax_scores(scores)?;
    Ok(dist
        .probs()
        .iter()
        .zip(targets)
        .map(|(&p, &t)| p - t)
        .collect())
}

/// Shannon entropy `−Σ p ln p` with `0 · ln 0 = 0`; the normalized form
/// divides by `ln N` and is clamped into `[0, 1]`.
pub fn entropy(dist: &RelevanceDistribution, normalized: bool) -> f64 {
    let h: f64 = dist
        .probs()
        .iter()
        .map(|&p| if p == 0.0 { 0.0 } else { -p * p.ln() })
        .sum();
    if !normalized {
        return h.max(0.0);
    }
    if dist.len() <= 1 {
        return 0.0;
    }
    (h / (dist.len() as f64).ln()).clamp(0.0, 1.0)
}
