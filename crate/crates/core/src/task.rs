//! The surfacing episode.
//!
//! A vehicle starts below the surface with a hidden set of broken actuators
//! and randomized dynamics. Every agent step applies one command for a full
//! action period (several physics substeps). The episode ends when the
//! vehicle reaches the surface or the time limit runs out.

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actuators::ActuatorPlant;
use crate::dynamics::{dynamics_step, world_vertical_velocity, BodyState, RigidBodyParams};
use crate::error::{Error, Result};
use crate::faults::{apply_faults, sample_faults, FaultMask, FaultSampling};
use crate::observation::{
    observe, randomize_params, randomize_plant, Observation, RandomizationRanges,
    SensorFilter, SensorNoiseConfig, OBS_DIM,
};
use crate::platform::Platform;
use crate::presets::PlatformModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            k1: 4.0,
            k2: 0.4,
            k3: -4.0,
            k4: -20.0,
            k5: 500.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        if [self.k1, self.k2, self.k3, self.k4, self.k5].iter().all(|k| k.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParams("reward weights must be finite".into()))
        }
    }
}

/// Sign convention of the time term of the goal reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoalTimeSign {
    /// `k4 (T_l - t) / T_l` with `k4` as configured.
    #[default]
    Verbatim,
    /// Same term with `k4` negated, so faster success earns more.
    Flipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Initial depth, m.
    pub start_depth: f64,
    /// Initial horizontal position, m.
    pub start_xy: [f64; 2],
    /// Episode time limit, s.
    pub time_limit: f64,
    /// Physics substep, s.
    pub dt: f64,
    /// Depth at or above which the vehicle counts as surfaced, m.
    pub surface_depth_threshold: f64,
    /// Time one agent action is held, s.
    pub action_period: f64,
    /// Per-axis bound of the uniform initial attitude perturbation, rad.
    pub attitude_perturbation: f64,
    #[serde(default)]
    pub goal_time_sign: GoalTimeSign,
    /// Also pay the goal reward on timeout.
    #[serde(default)]
    pub goal_on_timeout: bool,
}

impl EpisodeConfig {
    pub fn for_platform(platform: Platform) -> Self {
        Self {
            start_depth: 5.0,
            start_xy: [0.0, 0.0],
            time_limit: platform.default_time_limit(),
            dt: 0.05,
            surface_depth_threshold: 0.1,
            action_period: platform.default_action_period(),
            attitude_perturbation: 0.1,
            goal_time_sign: GoalTimeSign::Verbatim,
            goal_on_timeout: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return bad("time_limit must be positive");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.action_period >= self.dt && self.action_period.is_finite()) {
            return bad("action_period must be >= dt");
        }
        if !(self.start_depth.is_finite() && self.surface_depth_threshold.is_finite()) {
            return bad("start_depth and surface_depth_threshold must be finite");
        }
        if !(self.attitude_perturbation >= 0.0 && self.attitude_perturbation < 1.0) {
            return bad("attitude_perturbation must be in [0, 1) rad");
        }
        if !self.start_xy.iter().all(|v| v.is_finite()) {
            return bad("start_xy must be finite");
        }
        Ok(())
    }

    /// Physics substeps per agent step.
    pub fn substeps(&self) -> usize {
        ((self.action_period / self.dt).round() as usize).max(1)
    }
}

/// Immediate reward rate: `k1 v_z^w + k2 (z_body . z_world)`.
pub fn step_reward(state: &BodyState, w: &RewardWeights) -> f64 {
    w.k1 * world_vertical_velocity(state) + w.k2 * state.body_z_in_world().z
}

/// Episode reward paid once at the end; zero unless the vehicle surfaced.
pub fn goal_reward(
    final_xy: [f64; 2],
    start_xy: [f64; 2],
    t: f64,
    time_limit: f64,
    w: &RewardWeights,
    success: bool,
) -> f64 {
    if !success {
        return 0.0;
    }
    let d = (final_xy[0] - start_xy[0]).hypot(final_xy[1] - start_xy[1]);
    w.k3 * d + w.k4 * (time_limit - t) / time_limit + w.k5
}

/// Map a squashed action in `[-1, 1]` onto `[lo, hi]`.
pub fn scale_action(squashed: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    squashed
        .iter()
        .zip(bounds)
        .map(|(&s, &(lo, hi))| lo + 0.5 * (s.clamp(-1.0, 1.0) + 1.0) * (hi - lo))
        .collect()
}

/// One agent-level transition, as seen by a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub success: bool,
}

/// Minimal episodic interface the trainer drives. Actions are squashed
/// values in `[-1, 1]`.
pub trait Environment {
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, squashed_action: &[f64]) -> Result<Transition>;
    /// Label of the hidden episode condition, for logs only.
    fn condition_label(&self) -> String {
        String::new()
    }
    /// Horizontal distance travelled this episode, for logs only.
    fn distance(&self) -> f64 {
        0.0
    }
}

/// Extra detail returned with every step. Never fed to the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub success: bool,
    pub timeout: bool,
    pub elapsed: f64,
    pub steps: usize,
    pub fault_mask: FaultMask,
    /// Set when the episode was aborted on a non-finite state.
    pub diagnostic: Option<String>,
}

/// Surfacing environment for one platform.
#[derive(Debug, Clone)]
pub struct SurfacingEnv {
    pub model: PlatformModel,
    pub episode: EpisodeConfig,
    pub weights: RewardWeights,
    pub noise: SensorNoiseConfig,
    pub ranges: RandomizationRanges,
    pub sampling: FaultSampling,
    /// Use this mask instead of sampling one (evaluation and replay).
    pub fault_override: Option<FaultMask>,

    body: RigidBodyParams,
    plant: ActuatorPlant,
    state: BodyState,
    mask: FaultMask,
    filter: SensorFilter,
    rng: ChaCha8Rng,
    t: f64,
    steps: usize,
    done: bool,
    started: bool,
    record: bool,
    recorded: Vec<(f64, BodyState)>,
}

impl SurfacingEnv {
    pub fn new(
        model: PlatformModel,
        episode: EpisodeConfig,
        weights: RewardWeights,
        noise: SensorNoiseConfig,
        ranges: RandomizationRanges,
        sampling: FaultSampling,
    ) -> Result<Self> {
        model.actuators.validate()?;
        episode.validate()?;
        weights.validate()?;
        noise.validate()?;
        ranges.validate()?;
        let platform = model.platform();
        if sampling.min_faults > sampling.max_faults {
            return Err(Error::InvalidParams("min_faults exceeds max_faults".into()));
        }
        let state = BodyState::at_rest(Vector3::zeros());
        Ok(Self {
            body: model.body.clone(),
            plant: model.actuators.clone(),
            model,
            episode,
            weights,
            noise,
            ranges,
            sampling,
            fault_override: None,
            state,
            mask: FaultMask::healthy(platform),
            filter: SensorFilter::default(),
            rng: ChaCha8Rng::seed_from_u64(0),
            t: 0.0,
            steps: 0,
            done: true,
            started: false,
            record: false,
            recorded: Vec::new(),
        })
    }

    /// Default model, episode and sensor settings for `platform`.
    pub fn with_defaults(platform: Platform) -> Self {
        Self::new(
            PlatformModel::default_for(platform),
            EpisodeConfig::for_platform(platform),
            RewardWeights::default(),
            SensorNoiseConfig::default(),
            RandomizationRanges::default(),
            FaultSampling::for_platform(platform),
        )
        .expect("defaults are valid")
    }

    pub fn platform(&self) -> Platform {
        self.model.platform()
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    pub fn fault_mask(&self) -> &FaultMask {
        &self.mask
    }

    pub fn body_params(&self) -> &RigidBodyParams {
        &self.body
    }

    pub fn plant(&self) -> &ActuatorPlant {
        &self.plant
    }

    pub fn elapsed(&self) -> f64 {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Keep every physics substep of the latest agent step, for attitude
    /// statistics and trajectory output.
    pub fn set_recording(&mut self, on: bool) {
        self.record = on;
        self.recorded.clear();
    }

    /// `(t, state)` after each substep of the latest agent step.
    pub fn recorded_substeps(&self) -> &[(f64, BodyState)] {
        &self.recorded
    }

    /// Physical command range of each action channel.
    pub fn command_bounds(&self) -> Vec<(f64, f64)> {
        self.model.actuators.command_bounds()
    }

    /// Horizontal distance from the start position, m.
    pub fn distance_from_start(&self) -> f64 {
        let s = self.episode.start_xy;
        (self.state.position.x - s[0]).hypot(self.state.position.y - s[1])
    }

    /// Start a new episode: randomize dynamics, draw the hidden fault mask,
    /// place the vehicle and return the first observation.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        let platform = self.platform();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.body = randomize_params(&self.model.body, &self.ranges, &mut self.rng)?;
        self.plant = self.model.actuators.clone();
        randomize_plant(&mut self.plant, &self.ranges, &mut self.rng)?;
        self.plant.reset();

        let mut mask = match &self.fault_override {
            Some(m) => {
                if m.platform != platform || m.faulty.len() != platform.actuator_count() {
                    return Err(Error::InvalidMask(format!(
                        "override mask `{m}` does not fit platform {platform}"
                    )));
                }
                m.clone()
            }
            None => sample_faults(platform, &self.sampling, 0.0, &mut self.rng),
        };
        mask.frozen_angles = self.plant.servo_angles();
        self.mask = mask;

        let p = self.episode.attitude_perturbation;
        let mut angle = || if p > 0.0 { self.rng.random_range(-p..=p) } else { 0.0 };
        let (roll, pitch, yaw) = (angle(), angle(), angle());
        let [x, y] = self.episode.start_xy;
        self.state = BodyState {
            orientation: UnitQuaternion::from_euler_angles(roll, pitch, yaw),
            ..BodyState::at_rest(Vector3::new(x, y, -self.episode.start_depth))
        };
        self.t = 0.0;
        self.steps = 0;
        self.done = false;
        self.started = true;
        self.recorded.clear();
        self.filter.reset();
        Ok(observe(&self.state, &self.noise, &mut self.filter, &mut self.rng))
    }

    fn effective_weights(&self) -> RewardWeights {
        let mut w = self.weights;
        if self.episode.goal_time_sign == GoalTimeSign::Flipped {
            w.k4 = -w.k4;
        }
        w
    }

    fn surfaced(&self) -> bool {
        self.state.depth() <= self.episode.surface_depth_threshold
    }

    fn xy(&self) -> [f64; 2] {
        [self.state.position.x, self.state.position.y]
    }

    fn info(&self, success: bool, timeout: bool, diagnostic: Option<String>) -> StepInfo {
        StepInfo {
            success,
            timeout,
            elapsed: self.t,
            steps: self.steps,
            fault_mask: self.mask.clone(),
            diagnostic,
        }
    }

    /// Apply a physical actuator command for one action period.
    pub fn step_command(&mut self, command: &[f64]) -> Result<(Observation, f64, bool, StepInfo)> {
        if !self.started || self.done {
            return Err(Error::InvalidParams("step called on a finished episode; call reset".into()));
        }
        let platform = self.platform();
        if command.len() != platform.action_dim() {
            return Err(Error::Dimension {
                what: "action",
                expected: platform.action_dim(),
                got: command.len(),
            });
        }
        if command.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("action contains NaN or infinity".into()));
        }
        let w = self.effective_weights();
        let (t_l, dt) = (self.episode.time_limit, self.episode.dt);
        self.steps += 1;
        self.recorded.clear();

        if self.surfaced() {
            self.done = true;
            let r = goal_reward(self.xy(), self.episode.start_xy, self.t, t_l, &w, true);
            let obs = observe(&self.state, &self.noise, &mut self.filter, &mut self.rng);
            return Ok((obs, r, true, self.info(true, false, None)));
        }

        let bounds = self.plant.command_bounds();
        let clipped: Vec<f64> = command
            .iter()
            .zip(&bounds)
            .map(|(&c, &(lo, hi))| c.clamp(lo, hi))
            .collect();
        let masked = apply_faults(&clipped, &self.mask)?;
        self.plant.set_command(&masked, self.t)?;

        let rho = self.body.fluid_density;
        let mut reward = 0.0;
        let mut outcome = None;
        for _ in 0..self.episode.substeps() {
            let tau = self.plant.substep(&self.state, &self.mask, self.t, dt, rho);
            let next = dynamics_step(&self.state, &self.body, &tau, dt);
            if !next.is_finite() || !tau.is_finite() {
                let msg = format!(
                    "non-finite state at t = {:.3} s (mask {}, depth {:.3} m)",
                    self.t + dt,
                    self.mask,
                    self.state.depth()
                );
                self.done = true;
                let obs = observe(&self.state, &self.noise, &mut self.filter, &mut self.rng);
                return Ok((obs, reward, true, self.info(false, false, Some(msg))));
            }
            self.state = next;
            self.t += dt;
            if self.record {
                self.recorded.push((self.t, self.state));
            }
            reward += step_reward(&self.state, &w) * dt;
            if self.surfaced() {
                outcome = Some(true);
                break;
            }
            if self.t >= t_l - 1e-9 {
                outcome = Some(false);
                break;
            }
        }

        let (success, timeout) = match outcome {
            Some(true) => (true, false),
            Some(false) => (false, true),
            None => (false, false),
        };
        if success || timeout {
            self.done = true;
            let t = self.t.min(t_l);
            let pay = success || self.episode.goal_on_timeout;
            reward += goal_reward(self.xy(), self.episode.start_xy, t, t_l, &w, pay);
        }
        let obs = observe(&self.state, &self.noise, &mut self.filter, &mut self.rng);
        Ok((obs, reward, self.done, self.info(success, timeout, None)))
    }
}

impl Environment for SurfacingEnv {
    fn observation_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_dim(&self) -> usize {
        self.platform().action_dim()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        Ok(SurfacingEnv::reset(self, seed)?.to_array().to_vec())
    }

    fn step(&mut self, squashed_action: &[f64]) -> Result<Transition> {
        let command = scale_action(squashed_action, &self.command_bounds());
        if command.len() != self.action_dim() {
            return Err(Error::Dimension {
                what: "action",
                expected: self.action_dim(),
                got: squashed_action.len(),
            });
        }
        let (obs, reward, done, info) = self.step_command(&command)?;
        Ok(Transition {
            observation: obs.to_array().to_vec(),
            reward,
            done,
            success: info.success,
        })
    }

    fn condition_label(&self) -> String {
        self.mask.label()
    }

    fn distance(&self) -> f64 {
        self.distance_from_start()
    }
}

/// Open-loop "go up" command with every actuator healthy in mind.
pub fn scripted_ascent_command(platform: Platform) -> Vec<f64> {
    match platform {
        Platform::Hovering => vec![0.0, 0.0, 0.0, 0.0, 10.0, 10.0, 10.0, 10.0],
        // Tail rudders push the tail down so the nose pitches up.
        Platform::Torpedo => vec![-0.3, 0.0, 0.3, 0.0, 20.0],
        Platform::Ucat => {
            let fin = [0.5, std::f64::consts::FRAC_PI_2, 4.0 * std::f64::consts::PI, 0.0];
            fin.repeat(4)
        }
    }
}
