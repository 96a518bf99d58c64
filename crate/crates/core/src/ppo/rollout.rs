use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::loss::log_prob;
use crate::error::{Error, Result};
use crate::nn::NetworkWeights;
use crate::task::Environment;

/// How actions are chosen from the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Sample the Gaussian (training).
    Sample,
    /// Use the mean (evaluation).
    Mean,
}

/// One episode of on-policy experience, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRollout {
    pub seed: u64,
    pub obs_dim: usize,
    pub action_dim: usize,
    /// Observation before each step, `[T x obs_dim]`.
    pub observations: Vec<f64>,
    /// Pre-squash Gaussian sample, `[T x action_dim]`.
    pub raw_actions: Vec<f64>,
    /// `tanh(raw)`, what the environment received.
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Unscaled environment rewards.
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub success: bool,
    pub condition: String,
    pub distance: f64,
}

impl EpisodeRollout {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Upper bound on agent steps, in case an environment never terminates.
const MAX_STEPS: usize = 1_000_000;

/// Run one episode with the policy. The environment is reset with `seed`;
/// exploration noise comes from an independent stream derived from it.
pub fn collect_episode<E: Environment + ?Sized>(
    env: &mut E,
    weights: &NetworkWeights,
    seed: u64,
    mode: ActionMode,
) -> Result<EpisodeRollout> {
    let (obs_dim, action_dim) = (env.observation_dim(), env.action_dim());
    if weights.actor.input_dim() != obs_dim || weights.log_std.len() != action_dim {
        return Err(Error::Shape(format!(
            "network expects {} inputs / {} actions, environment has {obs_dim} / {action_dim}",
            weights.actor.input_dim(),
            weights.log_std.len()
        )));
    }
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);
    let mut ep = EpisodeRollout {
        seed,
        obs_dim,
        action_dim,
        observations: Vec::new(),
        raw_actions: Vec::new(),
        actions: Vec::new(),
        log_probs: Vec::new(),
        values: Vec::new(),
        rewards: Vec::new(),
        dones: Vec::new(),
        success: false,
        condition: String::new(),
        distance: 0.0,
    };
    let std: Vec<f64> = weights.log_std.iter().map(|s| s.exp()).collect();
    let mut state = weights.zero_state();
    let mut obs = env.reset(seed)?;
    ep.condition = env.condition_label();
    for _ in 0..MAX_STEPS {
        let out = weights.policy_step(&obs, &mut state)?;
        if !out.value.is_finite() || out.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Divergence("policy produced a non-finite output".into()));
        }
        let raw: Vec<f64> = match mode {
            ActionMode::Sample => out
                .mean
                .iter()
                .zip(&std)
                .map(|(m, s)| m + s * noise.sample::<f64, _>(StandardNormal))
                .collect(),
            ActionMode::Mean => out.mean.clone(),
        };
        let action: Vec<f64> = raw.iter().map(|u| u.tanh()).collect();
        let tr = env.step(&action)?;
        if !tr.reward.is_finite() {
            return Err(Error::NonFinite("environment returned a non-finite reward".into()));
        }
        ep.observations.extend_from_slice(&obs);
        ep.log_probs.push(log_prob(&raw, &out.mean, &out.log_std));
        ep.raw_actions.extend(raw);
        ep.actions.extend(action);
        ep.values.push(out.value);
        ep.rewards.push(tr.reward);
        ep.dones.push(tr.done);
        if tr.done {
            ep.success = tr.success;
            ep.distance = env.distance();
            return Ok(ep);
        }
        obs = tr.observation;
    }
    Err(Error::InvalidParams(format!("episode did not terminate within {MAX_STEPS} steps")))
}
