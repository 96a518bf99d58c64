//! Experiment configuration: one TOML file with a section per module.
//!
//! Parsing is strict. Unknown keys and missing keys are errors that name
//! the key and its line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::baseline::PidGains;
use crate::error::{Error, Result};
use crate::faults::{max_faults, FaultSampling};
use crate::nn::{NetConfig, INITIAL_LOG_STD};
use crate::observation::{RandomizationRanges, SensorNoiseConfig, OBS_DIM};
use crate::platform::Platform;
use crate::ppo::TrainConfig;
use crate::presets::{provenance, PlatformModel};
use crate::task::{EpisodeConfig, RewardWeights, SurfacingEnv};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkShape {
    /// Units per LSTM layer.
    pub hidden: usize,
    pub layers: usize,
    /// Exploration std (pre-squash) of a freshly initialized policy.
    pub initial_std: f64,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self {
            hidden: 64,
            layers: 3,
            initial_std: INITIAL_LOG_STD.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub platform: Platform,
    /// Master seed; every random draw derives from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Write a resumable checkpoint every this many episodes; 0 disables.
    pub checkpoint_every: usize,
    pub episode: EpisodeConfig,
    pub rewards: RewardWeights,
    pub sensors: SensorNoiseConfig,
    pub randomization: RandomizationRanges,
    pub faults: FaultSampling,
    pub network: NetworkShape,
    pub train: TrainConfig,
    /// Depth PID used by `compare` (fin robot only, ignored otherwise).
    pub baseline: PidGains,
    pub model: PlatformModel,
    /// Where each default value came from (free text per key).
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn default_for(platform: Platform) -> Self {
        Self {
            platform,
            seed: 0,
            output_dir: PathBuf::from(format!("runs/{platform}")),
            checkpoint_every: 500,
            episode: EpisodeConfig::for_platform(platform),
            rewards: RewardWeights::default(),
            sensors: SensorNoiseConfig::default(),
            randomization: RandomizationRanges::default(),
            faults: FaultSampling::for_platform(platform),
            network: NetworkShape::default(),
            train: TrainConfig::default(),
            baseline: PidGains::default(),
            model: PlatformModel::default_for(platform),
            provenance: provenance(platform)
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Parse and validate. Errors carry the line and column of the problem.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => Error::Config(format!("{}: {other}", path.display())),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML form, excluding `output_dir` and the
    /// thread count, which do not change results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.train.threads = 1;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        fn ctx(section: &'static str) -> impl Fn(Error) -> Error {
            move |e| Error::Config(format!("[{section}] {e}"))
        }
        if self.model.platform() != self.platform {
            return Err(Error::Config(format!(
                "[model] describes a {} but platform is {}",
                self.model.platform(),
                self.platform
            )));
        }
        self.model.actuators.validate().map_err(ctx("model"))?;
        self.episode.validate().map_err(ctx("episode"))?;
        self.rewards.validate().map_err(ctx("rewards"))?;
        self.sensors.validate().map_err(ctx("sensors"))?;
        self.randomization.validate().map_err(ctx("randomization"))?;
        self.train.validate().map_err(ctx("train"))?;
        self.baseline.validate().map_err(ctx("baseline"))?;
        let limit = max_faults(self.platform);
        if self.faults.min_faults > self.faults.max_faults || self.faults.max_faults > limit {
            return Err(Error::Config(format!(
                "[faults] need min_faults <= max_faults <= {limit} for {}",
                self.platform
            )));
        }
        if self.network.hidden == 0 || self.network.layers == 0 {
            return Err(Error::Config("[network] hidden and layers must be positive".into()));
        }
        if !(self.network.initial_std.is_finite() && self.network.initial_std > 0.0) {
            return Err(Error::Config("[network] initial_std must be positive".into()));
        }
        Ok(())
    }

    pub fn net_config(&self) -> NetConfig {
        NetConfig {
            input_dim: OBS_DIM,
            hidden: self.network.hidden,
            layers: self.network.layers,
            action_dim: self.platform.action_dim(),
        }
    }

    /// Trainer settings with the master seed filled in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn env(&self) -> Result<SurfacingEnv> {
        SurfacingEnv::new(
            self.model.clone(),
            self.episode.clone(),
            self.rewards,
            self.sensors.clone(),
            self.randomization.clone(),
            self.faults,
        )
    }
}
