//! On-policy training of the recurrent actor-critic with clipped PPO.
//!
//! A batch is a fixed number of whole episodes collected with one weight
//! snapshot. Advantages come from GAE on reward-scaled returns and are
//! normalized over the batch. Each epoch shuffles the episode order and
//! steps Adam once per minibatch of episodes; recurrent states are always
//! replayed from the episode start.

mod adam;
mod gae;
mod loss;
mod rollout;
mod toy;

pub use adam::{clip_grad_norm, Adam};
pub use gae::{compute_gae, normalize};
pub use loss::{
    clipped_surrogate, entropy, gaussian_log_prob, log_prob, ppo_loss, squash_log_det,
    LossConfig, LossStats, PreparedEpisode,
};
pub use rollout::{collect_episode, ActionMode, EpisodeRollout};
pub use toy::PointMassEnv;

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{transfer_layers, Checkpoint, NetConfig, NetworkWeights};
use crate::task::Environment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub clip: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub episodes_per_batch: usize,
    /// Episodes per gradient step within an epoch.
    pub minibatch_episodes: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Gradient-norm limit applied to the actor and the critic separately.
    pub max_grad_norm: f64,
    /// Rewards are multiplied by this before GAE; logged returns are not.
    pub reward_scale: f64,
    pub max_episodes: usize,
    pub success_window: usize,
    pub success_threshold: f64,
    /// Truncated BPTT chunk length; `None` uses whole episodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bptt_window: Option<usize>,
    /// Worker threads for rollouts and gradients; 1 runs on the caller.
    pub threads: usize,
    /// Master seed. Configuration files set it once at the top level.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            gamma: 0.99,
            clip: 0.2,
            gae_lambda: 0.95,
            epochs: 10,
            episodes_per_batch: 8,
            minibatch_episodes: 4,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            reward_scale: 0.01,
            max_episodes: 20_000,
            success_window: 100,
            success_threshold: 0.99,
            bptt_window: None,
            threads: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be positive");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must be in [0, 1]");
        }
        if self.epochs == 0 || self.episodes_per_batch == 0 || self.minibatch_episodes == 0 {
            return bad("epochs, episodes_per_batch and minibatch_episodes must be positive");
        }
        if !(self.entropy_coef >= 0.0 && self.value_coef >= 0.0 && self.max_grad_norm >= 0.0) {
            return bad("loss coefficients and max_grad_norm must be >= 0");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be positive");
        }
        if self.success_window == 0 || !(0.0..=1.0).contains(&self.success_threshold) {
            return bad("success_window must be positive and success_threshold in [0, 1]");
        }
        if self.threads == 0 {
            return bad("threads must be at least 1");
        }
        if self.bptt_window == Some(0) {
            return bad("bptt_window must be positive when set");
        }
        Ok(())
    }

    fn loss_config(&self) -> LossConfig {
        LossConfig {
            clip: self.clip,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
            bptt_window: self.bptt_window,
        }
    }
}

/// SplitMix64 finalizer, used to derive independent per-episode seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th item of the stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(stream)) ^ index)
}

const EPISODE_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

/// Whether the last `window` outcomes reach `threshold`. Needs a full window.
pub fn criterion_met(outcomes: &[bool], window: usize, threshold: f64) -> bool {
    if outcomes.len() < window || window == 0 {
        return false;
    }
    let wins = outcomes[outcomes.len() - window..].iter().filter(|s| **s).count();
    wins as f64 >= threshold * window as f64 - 1e-9
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    pub seed: u64,
    pub success: bool,
    pub total_reward: f64,
    pub steps: usize,
    pub condition: String,
    pub distance: f64,
    /// Success rate over the last `min(window, episode)` episodes.
    pub trailing_success: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub records: Vec<EpisodeRecord>,
    pub episodes_to_criterion: Option<usize>,
    pub batches: u64,
    pub updates: u64,
    pub last_stats: Option<LossStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainOutcome {
    Criterion,
    MaxEpisodes,
}

/// Mutable training state: weights, optimizer and progress counters.
pub struct Trainer<E> {
    env: E,
    pub cfg: TrainConfig,
    pub weights: NetworkWeights,
    pub adam: Adam,
    pub log: TrainingLog,
    recent: VecDeque<bool>,
    episodes_done: usize,
    pool: Option<ThreadPool>,
}

impl<E: Environment + Clone + Send + Sync> Trainer<E> {
    pub fn new(env: E, weights: NetworkWeights, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if weights.actor.input_dim() != env.observation_dim() || weights.log_std.len() != env.action_dim() {
            return Err(Error::Shape(format!(
                "network ({} inputs, {} actions) does not fit the environment ({}, {})",
                weights.actor.input_dim(),
                weights.log_std.len(),
                env.observation_dim(),
                env.action_dim()
            )));
        }
        let pool = if cfg.threads > 1 {
            let p = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Some(p)
        } else {
            None
        };
        Ok(Self {
            adam: Adam::new(&weights, cfg.learning_rate),
            env,
            weights,
            log: TrainingLog::default(),
            recent: VecDeque::new(),
            episodes_done: 0,
            pool,
            cfg,
        })
    }

    /// Fresh weights from the config seed, optionally with LSTM layers copied
    /// from `transfer` before the first episode.
    pub fn fresh(
        env: E,
        net: &NetConfig,
        cfg: TrainConfig,
        transfer: Option<(&NetworkWeights, &[usize])>,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, INIT_STREAM, 0));
        let mut weights = NetworkWeights::init(net, &mut rng)?;
        if let Some((src, layers)) = transfer {
            weights = transfer_layers(src, &weights, layers)?;
        }
        Self::new(env, weights, cfg)
    }

    pub fn episodes_done(&self) -> usize {
        self.episodes_done
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    /// Success rate over the trailing window (partial windows included).
    pub fn trailing_success(&self) -> f64 {
        if self.recent.is_empty() {
            0.0
        } else {
            self.recent.iter().filter(|s| **s).count() as f64 / self.recent.len() as f64
        }
    }

    fn record(&mut self, ep: &EpisodeRollout) -> bool {
        self.episodes_done += 1;
        self.recent.push_back(ep.success);
        while self.recent.len() > self.cfg.success_window {
            self.recent.pop_front();
        }
        self.log.records.push(EpisodeRecord {
            episode: self.episodes_done,
            seed: ep.seed,
            success: ep.success,
            total_reward: ep.total_reward(),
            steps: ep.len(),
            condition: ep.condition.clone(),
            distance: ep.distance,
            trailing_success: self.trailing_success(),
        });
        let window: Vec<bool> = self.recent.iter().copied().collect();
        criterion_met(&window, self.cfg.success_window, self.cfg.success_threshold)
    }

    fn map_ordered<T: Send, U: Sync>(&self, items: &[U], f: impl Fn(&U) -> T + Sync + Send) -> Vec<T> {
        match &self.pool {
            Some(p) => p.install(|| items.par_iter().map(&f).collect()),
            None => items.iter().map(f).collect(),
        }
    }

    /// Collect one batch, log it, and update the weights unless the stopping
    /// rule fired. On divergence the weights and optimizer are left as they
    /// were before the batch and an error is returned.
    pub fn run_batch(&mut self) -> Result<Option<TrainOutcome>> {
        let remaining = self.cfg.max_episodes.saturating_sub(self.episodes_done);
        if remaining == 0 {
            return Ok(Some(TrainOutcome::MaxEpisodes));
        }
        let n = self.cfg.episodes_per_batch.min(remaining);
        let seeds: Vec<u64> = (0..n)
            .map(|k| derive_seed(self.cfg.seed, EPISODE_STREAM, (self.episodes_done + k) as u64))
            .collect();
        let weights = &self.weights;
        let env = &self.env;
        let rollouts: Vec<Result<EpisodeRollout>> = self.map_ordered(&seeds, |&s| {
            let mut e = env.clone();
            collect_episode(&mut e, weights, s, ActionMode::Sample)
        });
        let rollouts: Vec<EpisodeRollout> = rollouts.into_iter().collect::<Result<_>>()?;

        for ep in &rollouts {
            if self.record(ep) {
                self.log.episodes_to_criterion = Some(self.episodes_done);
                self.log.batches += 1;
                return Ok(Some(TrainOutcome::Criterion));
            }
        }
        let batch_index = self.log.batches;
        self.log.batches += 1;
        self.update(rollouts, batch_index)?;
        if self.episodes_done >= self.cfg.max_episodes {
            return Ok(Some(TrainOutcome::MaxEpisodes));
        }
        Ok(None)
    }

    fn prepare(&self, rollouts: Vec<EpisodeRollout>) -> Result<Vec<PreparedEpisode>> {
        let mut prepared = Vec::with_capacity(rollouts.len());
        for r in rollouts {
            let scaled: Vec<f64> = r.rewards.iter().map(|x| x * self.cfg.reward_scale).collect();
            let (advantages, returns) =
                compute_gae(&scaled, &r.values, &r.dones, self.cfg.gamma, self.cfg.gae_lambda)?;
            prepared.push(PreparedEpisode {
                rollout: r,
                advantages,
                returns,
            });
        }
        let mut all: Vec<f64> = prepared.iter().flat_map(|p| p.advantages.iter().copied()).collect();
        normalize(&mut all);
        let mut k = 0;
        for p in &mut prepared {
            let n = p.advantages.len();
            p.advantages.copy_from_slice(&all[k..k + n]);
            k += n;
        }
        Ok(prepared)
    }

    fn update(&mut self, rollouts: Vec<EpisodeRollout>, batch_index: u64) -> Result<()> {
        let prepared = self.prepare(rollouts)?;
        let snapshot = (self.weights.clone(), self.adam.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.cfg.seed, SHUFFLE_STREAM, batch_index));
        let mut order: Vec<usize> = (0..prepared.len()).collect();
        let loss_cfg = self.cfg.loss_config();
        let result = (|| -> Result<()> {
            for _ in 0..self.cfg.epochs {
                order.shuffle(&mut rng);
                for chunk in order.chunks(self.cfg.minibatch_episodes) {
                    let mb: Vec<&PreparedEpisode> = chunk.iter().map(|&i| &prepared[i]).collect();
                    let (stats, grads) = ppo_loss(&self.weights, &mb, &loss_cfg, true, self.pool.as_ref())?;
                    let mut grads = grads.expect("gradients requested");
                    let split = self.weights.actor_param_count();
                    let mut params = grads.params_mut();
                    let (actor, critic) = params.split_at_mut(split);
                    clip_grad_norm(actor, self.cfg.max_grad_norm);
                    clip_grad_norm(critic, self.cfg.max_grad_norm);
                    if !grads.is_finite() {
                        return Err(Error::Divergence("non-finite gradient".into()));
                    }
                    self.adam.update(&mut self.weights, &grads);
                    if !self.weights.is_finite() {
                        return Err(Error::Divergence("non-finite weights after update".into()));
                    }
                    self.log.updates += 1;
                    self.log.last_stats = Some(stats);
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            (self.weights, self.adam) = snapshot;
            return Err(e);
        }
        Ok(())
    }

    /// Train until the stopping rule or the episode budget. `on_batch` runs
    /// after every batch with the records it added.
    pub fn train(
        &mut self,
        mut on_batch: impl FnMut(&Self, &[EpisodeRecord]) -> Result<()>,
    ) -> Result<TrainOutcome> {
        loop {
            let before = self.log.records.len();
            let outcome = self.run_batch()?;
            on_batch(self, &self.log.records[before..])?;
            if let Some(o) = outcome {
                return Ok(o);
            }
        }
    }

    /// Weights, optimizer moments and progress counters.
    pub fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::from_weights(&self.weights);
        c.tensors.extend(self.adam.to_tensors());
        let m = &mut c.meta;
        m.insert("adam_step".into(), self.adam.step.to_string());
        m.insert("episodes".into(), self.episodes_done.to_string());
        m.insert("batches".into(), self.log.batches.to_string());
        m.insert("updates".into(), self.log.updates.to_string());
        let recent: String = self.recent.iter().map(|s| if *s { '1' } else { '0' }).collect();
        m.insert("recent_outcomes".into(), recent);
        c
    }

    /// Continue from [`Self::checkpoint`] output. Episode seeds continue
    /// where they left off, so a resumed run collects the same episodes an
    /// uninterrupted one would have.
    pub fn resume(env: E, cfg: TrainConfig, ckpt: &Checkpoint) -> Result<Self> {
        let weights = ckpt.weights()?;
        let meta = |k: &str| -> Result<&str> {
            ckpt.meta
                .get(k)
                .map(|s| s.as_str())
                .ok_or_else(|| Error::Config(format!("checkpoint has no `{k}` entry; cannot resume")))
        };
        let num = |k: &str| -> Result<u64> {
            meta(k)?
                .parse()
                .map_err(|_| Error::Config(format!("checkpoint entry `{k}` is not a number")))
        };
        let mut t = Self::new(env, weights, cfg)?;
        t.adam = Adam::from_tensors(&t.weights, &ckpt.tensors, num("adam_step")?, t.cfg.learning_rate)?;
        t.episodes_done = num("episodes")? as usize;
        t.log.batches = num("batches")?;
        t.log.updates = num("updates")?;
        t.recent = meta("recent_outcomes")?.chars().map(|c| c == '1').collect();
        Ok(t)
    }
}

/// Train a fresh network on `env` and return the log and final weights.
pub fn train<E: Environment + Clone + Send + Sync>(
    env: E,
    net: &NetConfig,
    cfg: &TrainConfig,
    transfer: Option<(&NetworkWeights, &[usize])>,
) -> Result<(TrainingLog, NetworkWeights)> {
    let mut t = Trainer::fresh(env, net, cfg.clone(), transfer)?;
    t.train(|_, _| Ok(()))?;
    Ok((t.log, t.weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_net() -> NetConfig {
        NetConfig {
            input_dim: 2,
            hidden: 8,
            layers: 1,
            action_dim: 1,
        }
    }

    fn toy_cfg(seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: 3e-3,
            reward_scale: 1.0,
            max_episodes: 64,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn criterion_window() {
        let mut v = vec![true; 99];
        v.push(false);
        assert!(criterion_met(&v, 100, 0.99));
        v.push(false);
        assert!(!criterion_met(&v, 100, 0.99));
        assert!(!criterion_met(&[true; 99], 100, 0.99));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|i| derive_seed(7, EPISODE_STREAM, i)).collect();
        let mut s = a.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), a.len());
        assert_eq!(derive_seed(7, 1, 3), derive_seed(7, 1, 3));
        assert_ne!(derive_seed(7, 1, 3), derive_seed(8, 1, 3));
    }

    #[test]
    fn logged_log_prob_matches_recomputation() {
        let t = Trainer::fresh(PointMassEnv::default(), &toy_net(), toy_cfg(1), None).unwrap();
        let mut env = PointMassEnv::default();
        let ep = collect_episode(&mut env, &t.weights, 5, ActionMode::Sample).unwrap();
        let tr = t.weights.actor.forward_seq(&ep.observations).unwrap();
        for k in 0..ep.len() {
            let lp = log_prob(&ep.raw_actions[k..k + 1], &tr.outputs[k..k + 1], &t.weights.log_std);
            assert!((lp - ep.log_probs[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_thread_runs_are_bitwise_identical() {
        let run = || {
            let (log, w) = train(PointMassEnv::default(), &toy_net(), &toy_cfg(3), None).unwrap();
            (log, w)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let one = train(PointMassEnv::default(), &toy_net(), &toy_cfg(4), None).unwrap();
        let cfg = TrainConfig { threads: 3, ..toy_cfg(4) };
        let three = train(PointMassEnv::default(), &toy_net(), &cfg, None).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let cfg = toy_cfg(9);
        let (full_log, full_w) = train(PointMassEnv::default(), &toy_net(), &cfg, None).unwrap();

        let mut t = Trainer::fresh(PointMassEnv::default(), &toy_net(), cfg.clone(), None).unwrap();
        for _ in 0..3 {
            t.run_batch().unwrap();
        }
        let ckpt = Checkpoint::from_bytes(&t.checkpoint().to_bytes()).unwrap();
        let mut r = Trainer::resume(PointMassEnv::default(), cfg, &ckpt).unwrap();
        r.train(|_, _| Ok(())).unwrap();
        assert_eq!(r.weights, full_w);
        assert_eq!(r.log.records, full_log.records[24..]);
    }

    #[test]
    fn stops_at_max_episodes() {
        let cfg = TrainConfig { max_episodes: 20, ..toy_cfg(2) };
        let (log, _) = train(PointMassEnv::default(), &toy_net(), &cfg, None).unwrap();
        assert_eq!(log.records.len(), 20);
        assert_eq!(log.episodes_to_criterion, None);
    }

    #[test]
    fn rejects_mismatched_network() {
        let net = NetConfig { action_dim: 3, ..toy_net() };
        assert!(matches!(
            Trainer::fresh(PointMassEnv::default(), &net, toy_cfg(0), None),
            Err(Error::Shape(_))
        ));
    }
}
