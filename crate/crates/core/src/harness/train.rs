//! The `train` workflow: config in, log + checkpoints + summary out.
//!
//! Output directory layout:
//!
//! - `config.toml`: the resolved configuration;
//! - `training_log.csv`: one row per episode;
//! - `checkpoints/episode_NNNNNN.ckpt`: periodic resumable checkpoints;
//! - `final.ckpt`: state when training stopped;
//! - `diverged.ckpt`: last good state if an update diverged;
//! - `summary.toml`: outcome, counts and wall time.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::eval::write_file;
use crate::error::{Error, Result};
use crate::nn::{save_checkpoint, Checkpoint, NetworkWeights};
use crate::ppo::{EpisodeRecord, TrainOutcome, Trainer};
use crate::task::SurfacingEnv;

/// Layers copied from a source network before training starts.
pub struct TransferSpec<'a> {
    pub source: &'a NetworkWeights,
    /// 1-based LSTM layer indices.
    pub layers: &'a [usize],
    /// Shown in checkpoint metadata and the summary.
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub platform: String,
    pub seed: u64,
    pub config_hash: String,
    /// `criterion` or `max_episodes`.
    pub outcome: String,
    pub episodes: usize,
    pub episodes_to_criterion: Option<usize>,
    pub batches: u64,
    pub updates: u64,
    pub final_checkpoint: PathBuf,
    pub transfer_from: Option<String>,
    pub transfer_layers: Vec<usize>,
    pub wall_time_s: f64,
}

const LOG_HEADER: [&str; 8] = [
    "episode",
    "seed",
    "success",
    "total_reward",
    "steps",
    "fault_mask",
    "distance_m",
    "trailing_success",
];

fn log_row(r: &EpisodeRecord) -> [String; 8] {
    [
        r.episode.to_string(),
        r.seed.to_string(),
        u8::from(r.success).to_string(),
        r.total_reward.to_string(),
        r.steps.to_string(),
        r.condition.clone(),
        r.distance.to_string(),
        r.trailing_success.to_string(),
    ]
}

struct Outputs<'a> {
    dir: &'a Path,
    hash: String,
    cfg: &'a ExperimentConfig,
    transfer: Option<(String, Vec<usize>)>,
}

impl Outputs<'_> {
    fn checkpoint(&self, trainer: &Trainer<SurfacingEnv>) -> Checkpoint {
        let mut c = trainer.checkpoint();
        c.meta.insert("config_hash".into(), self.hash.clone());
        c.meta.insert("seed".into(), self.cfg.seed.to_string());
        c.meta.insert("platform".into(), self.cfg.platform.to_string());
        if let Some((from, layers)) = &self.transfer {
            c.meta.insert("transfer_from".into(), from.clone());
            let l: Vec<String> = layers.iter().map(|l| l.to_string()).collect();
            c.meta.insert("transfer_layers".into(), l.join(","));
        }
        c
    }

    fn save(&self, trainer: &Trainer<SurfacingEnv>, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(d) = path.parent() {
            std::fs::create_dir_all(d)?;
        }
        save_checkpoint(&self.checkpoint(trainer), &path)?;
        Ok(path)
    }
}

/// Train per `cfg`, writing everything under `cfg.output_dir`. With
/// `resume`, training continues from that checkpoint and the episode log is
/// appended. `progress` receives one line per batch.
pub fn run_training(
    cfg: &ExperimentConfig,
    transfer: Option<TransferSpec<'_>>,
    resume: Option<&Checkpoint>,
    mut progress: impl FnMut(&str),
) -> Result<TrainSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir)?;
    let env = cfg.env()?;
    let tcfg = cfg.train_config();
    let mut trainer = match resume {
        Some(ckpt) => {
            if let Some(p) = ckpt.meta.get("platform") {
                if p != cfg.platform.name() {
                    return Err(Error::Shape(format!(
                        "checkpoint was trained on {p}, config is for {}",
                        cfg.platform
                    )));
                }
            }
            Trainer::resume(env, tcfg, ckpt)?
        }
        None => {
            let t = transfer.as_ref().map(|t| (t.source, t.layers));
            let mut trainer = Trainer::fresh(env, &cfg.net_config(), tcfg, t)?;
            trainer.weights.log_std.fill(cfg.network.initial_std.ln());
            trainer
        }
    };
    let out = Outputs {
        dir,
        hash: cfg.hash(),
        cfg,
        transfer: transfer.as_ref().map(|t| (t.origin.clone(), t.layers.to_vec())),
    };
    write_file(&dir.join("config.toml"), cfg.to_toml().as_bytes())?;

    let log_path = dir.join("training_log.csv");
    let appending = resume.is_some() && log_path.exists();
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(appending)
        .truncate(!appending)
        .open(&log_path)?;
    if !appending {
        writeln!(file, "# config_hash={} seed={} platform={}", out.hash, cfg.seed, cfg.platform)?;
    }
    let mut log = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if !appending {
        log.write_record(LOG_HEADER)?;
    }

    let every = cfg.checkpoint_every;
    let result = trainer.train(|tr, records| {
        for r in records {
            log.write_record(log_row(r))?;
        }
        log.flush()?;
        let done = tr.episodes_done();
        if every > 0 && !records.is_empty() && done / every > (done - records.len()) / every {
            out.save(tr, &format!("checkpoints/episode_{done:06}.ckpt"))?;
        }
        let ret = records.iter().map(|r| r.total_reward).sum::<f64>() / records.len().max(1) as f64;
        progress(&format!(
            "episodes {done:>6}  trailing success {:.2}  mean return {ret:8.1}",
            tr.trailing_success()
        ));
        Ok(())
    });
    let outcome = match result {
        Ok(o) => o,
        Err(Error::Divergence(msg)) => {
            let path = out.save(&trainer, "diverged.ckpt")?;
            return Err(Error::Divergence(format!(
                "{msg}; last good state saved to {} (resume with --resume)",
                path.display()
            )));
        }
        Err(e) => return Err(e),
    };
    let final_checkpoint = out.save(&trainer, "final.ckpt")?;
    let summary = TrainSummary {
        platform: cfg.platform.to_string(),
        seed: cfg.seed,
        config_hash: out.hash.clone(),
        outcome: match outcome {
            TrainOutcome::Criterion => "criterion",
            TrainOutcome::MaxEpisodes => "max_episodes",
        }
        .to_string(),
        episodes: trainer.episodes_done(),
        episodes_to_criterion: trainer.log.episodes_to_criterion,
        batches: trainer.log.batches,
        updates: trainer.log.updates,
        final_checkpoint,
        transfer_from: out.transfer.as_ref().map(|t| t.0.clone()),
        transfer_layers: out.transfer.as_ref().map(|t| t.1.clone()).unwrap_or_default(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = toml::to_string(&summary).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("summary.toml"), text.as_bytes())?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::load_checkpoint;
    use crate::Platform;

    fn tiny(dir: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default_for(Platform::Torpedo);
        cfg.output_dir = dir.to_path_buf();
        cfg.episode.time_limit = 2.0;
        cfg.network.hidden = 4;
        cfg.network.layers = 1;
        cfg.train.max_episodes = 6;
        cfg.train.episodes_per_batch = 2;
        cfg.train.epochs = 1;
        cfg.train.minibatch_episodes = 2;
        cfg.checkpoint_every = 4;
        cfg
    }

    #[test]
    fn writes_log_checkpoints_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let s = run_training(&cfg, None, None, |_| {}).unwrap();
        assert_eq!(s.episodes, 6);
        assert_eq!(s.outcome, "max_episodes");
        let log = std::fs::read_to_string(dir.path().join("training_log.csv")).unwrap();
        assert!(log.starts_with(&format!("# config_hash={}", cfg.hash())));
        assert_eq!(log.lines().count(), 2 + 6);
        assert!(dir.path().join("checkpoints/episode_000004.ckpt").exists());
        let ck = load_checkpoint(&dir.path().join("final.ckpt")).unwrap();
        assert_eq!(ck.meta["config_hash"], cfg.hash());
        assert!(dir.path().join("summary.toml").exists());
    }

    #[test]
    fn resume_appends_to_the_log() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.train.max_episodes = 4;
        run_training(&cfg, None, None, |_| {}).unwrap();
        let ck = load_checkpoint(&dir.path().join("final.ckpt")).unwrap();
        cfg.train.max_episodes = 6;
        let s = run_training(&cfg, None, Some(&ck), |_| {}).unwrap();
        assert_eq!(s.episodes, 6);
        let log = std::fs::read_to_string(dir.path().join("training_log.csv")).unwrap();
        assert_eq!(log.lines().count(), 2 + 6);
    }
}
