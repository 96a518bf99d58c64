//! Tanh-squashed diagonal Gaussian policy and the clipped PPO objective.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use rayon::ThreadPool;

use super::rollout::EpisodeRollout;
use crate::error::{Error, Result};
use crate::nn::NetworkWeights;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Log-density of the pre-squash Gaussian at `raw`.
pub fn gaussian_log_prob(raw: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    raw.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((u, m), s)| {
            let z = (u - m) * (-s).exp();
            -0.5 * z * z - s - HALF_LN_2PI
        })
        .sum()
}

/// `sum_j ln(1 - tanh(u_j)^2)`, computed without cancellation.
pub fn squash_log_det(raw: &[f64]) -> f64 {
    raw.iter().map(|u| 2.0 * (LN_2 - u - softplus(-2.0 * u))).sum()
}

/// Log-probability of the squashed action `tanh(raw)`.
pub fn log_prob(raw: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    gaussian_log_prob(raw, mean, log_std) - squash_log_det(raw)
}

/// Entropy of the pre-squash Gaussian.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|s| s + 0.5 * (2.0 * PI).ln() + 0.5).sum()
}

/// Per-sample clipped surrogate `min(r A, clip(r, 1-eps, 1+eps) A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub bptt_window: Option<usize>,
}

/// An episode with its advantage targets.
#[derive(Debug, Clone)]
pub struct PreparedEpisode {
    pub rollout: EpisodeRollout,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossStats {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub samples: usize,
}

#[derive(Default)]
struct Partial {
    surrogate: f64,
    value_sq: f64,
    kl: f64,
    clipped: usize,
}

fn episode_terms(
    w: &NetworkWeights,
    ep: &PreparedEpisode,
    n_total: f64,
    cfg: &LossConfig,
    want_grad: bool,
) -> Result<(Partial, Option<NetworkWeights>)> {
    let r = &ep.rollout;
    let a_dim = w.log_std.len();
    let steps = r.len();
    let actor = w.actor.forward_seq(&r.observations)?;
    let critic = w.critic.forward_seq(&r.observations)?;
    let inv_std: Vec<f64> = w.log_std.iter().map(|s| (-s).exp()).collect();

    let mut part = Partial::default();
    let mut d_mean = vec![0.0; steps * a_dim];
    let mut d_value = vec![0.0; steps];
    let mut d_log_std = vec![0.0; a_dim];
    for t in 0..steps {
        let mean = &actor.outputs[t * a_dim..(t + 1) * a_dim];
        let raw = &r.raw_actions[t * a_dim..(t + 1) * a_dim];
        let lp = log_prob(raw, mean, &w.log_std);
        let ratio = (lp - r.log_probs[t]).exp();
        if !ratio.is_finite() {
            return Err(Error::Divergence(format!("non-finite probability ratio at step {t}")));
        }
        let adv = ep.advantages[t];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
        part.surrogate += unclipped.min(clipped);
        if (ratio - 1.0).abs() > cfg.clip {
            part.clipped += 1;
        }
        part.kl += (ratio - 1.0) - ratio.ln();
        if want_grad && unclipped <= clipped {
            // d(-surrogate/N)/d(log pi)
            let g = -adv * ratio / n_total;
            for j in 0..a_dim {
                let z = (raw[j] - mean[j]) * inv_std[j];
                d_mean[t * a_dim + j] = g * z * inv_std[j];
                d_log_std[j] += g * (z * z - 1.0);
            }
        }
        let diff = critic.outputs[t] - ep.returns[t];
        part.value_sq += diff * diff;
        d_value[t] = cfg.value_coef * 2.0 * diff / n_total;
    }
    if !want_grad {
        return Ok((part, None));
    }
    let grads = NetworkWeights {
        actor: w.actor.backward_seq(&actor, &d_mean, cfg.bptt_window)?,
        log_std: d_log_std,
        critic: w.critic.backward_seq(&critic, &d_value, cfg.bptt_window)?,
    };
    Ok((part, Some(grads)))
}

/// Clipped PPO loss over whole episodes and, if requested, its exact
/// gradient. Advantages must already be normalized.
///
/// `loss = -mean(min(r A, clip(r) A)) + c_v mean((V - R)^2) - c_e H`
///
/// Episodes are evaluated in parallel on `pool` when given; partial results
/// are summed in episode order, so the result does not depend on the number
/// of threads.
pub fn ppo_loss(
    weights: &NetworkWeights,
    episodes: &[&PreparedEpisode],
    cfg: &LossConfig,
    want_grad: bool,
    pool: Option<&ThreadPool>,
) -> Result<(LossStats, Option<NetworkWeights>)> {
    let n: usize = episodes.iter().map(|e| e.rollout.len()).sum();
    if n == 0 {
        return Err(Error::InvalidParams("empty PPO batch".into()));
    }
    let nf = n as f64;
    let run = |ep: &&PreparedEpisode| episode_terms(weights, ep, nf, cfg, want_grad);
    let parts: Vec<Result<_>> = match pool {
        Some(p) => p.install(|| episodes.par_iter().map(run).collect()),
        None => episodes.iter().map(run).collect(),
    };

    let mut total = Partial::default();
    let mut grads = want_grad.then(|| weights.zeros_like());
    for part in parts {
        let (p, g) = part?;
        total.surrogate += p.surrogate;
        total.value_sq += p.value_sq;
        total.kl += p.kl;
        total.clipped += p.clipped;
        if let (Some(acc), Some(g)) = (grads.as_mut(), g) {
            acc.axpy(1.0, &g);
        }
    }
    let h = entropy(&weights.log_std);
    if let Some(g) = grads.as_mut() {
        for d in &mut g.log_std {
            *d -= cfg.entropy_coef;
        }
    }
    let policy_loss = -total.surrogate / nf;
    let value_loss = total.value_sq / nf;
    let loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * h;
    if !loss.is_finite() {
        return Err(Error::Divergence("non-finite PPO loss".into()));
    }
    let stats = LossStats {
        loss,
        policy_loss,
        value_loss,
        entropy: h,
        approx_kl: total.kl / nf,
        clip_fraction: total.clipped as f64 / nf,
        samples: n,
    };
    Ok((stats, grads))
}
