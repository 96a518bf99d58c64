//! Deterministic evaluation, controller comparison and trajectory replay.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::baseline::{PidController, PidGains};
use crate::dynamics::BodyState;
use crate::error::{Error, Result};
use crate::faults::{enumerate_fault_set, FaultMask};
use crate::nn::NetworkWeights;
use crate::observation::OBS_DIM;
use crate::platform::Platform;
use crate::ppo::derive_seed;
use crate::task::{scale_action, SurfacingEnv};

const EVAL_STREAM: u64 = 11;

/// Refuse to run a network on a platform it was not built for.
pub fn check_policy_shape(weights: &NetworkWeights, platform: Platform) -> Result<()> {
    let (inputs, actions) = (weights.actor.input_dim(), weights.log_std.len());
    if inputs != OBS_DIM || actions != platform.action_dim() {
        return Err(Error::Shape(format!(
            "checkpoint has {inputs} inputs and {actions} actions; {platform} needs {OBS_DIM} and {}",
            platform.action_dim()
        )));
    }
    Ok(())
}

/// What drives the vehicle during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Controller<'a> {
    /// Recurrent policy, acting with its distribution mean.
    Policy(&'a NetworkWeights),
    /// Depth PID on the fin robot.
    Pid(&'a PidGains),
}

impl Controller<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Policy(_) => "RL",
            Controller::Pid(_) => "PID",
        }
    }

    fn check(&self, platform: Platform) -> Result<()> {
        match self {
            Controller::Policy(w) => check_policy_shape(w, platform),
            Controller::Pid(g) => {
                if platform != Platform::Ucat {
                    return Err(Error::UnsupportedPlatform {
                        op: "PID baseline",
                        platform: platform.to_string(),
                    });
                }
                g.validate()
            }
        }
    }
}

/// One agent step of a recorded episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub state: BodyState,
    /// Physical command sent this step (before fault masking).
    pub command: Vec<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub mask: FaultMask,
    pub success: bool,
    pub elapsed: f64,
    pub distance: f64,
    pub total_reward: f64,
    /// Roll and pitch after every physics substep, rad.
    pub attitude: Vec<(f64, f64)>,
    pub rows: Vec<TraceRow>,
}

/// Run one episode to completion with a deterministic controller.
pub fn run_episode(env: &mut SurfacingEnv, controller: Controller<'_>, seed: u64) -> Result<EpisodeResult> {
    let platform = env.platform();
    controller.check(platform)?;
    env.set_recording(true);
    let mut obs = env.reset(seed)?;
    let bounds = env.command_bounds();
    let period = env.episode.action_period;
    let mut policy_state = match controller {
        Controller::Policy(w) => Some(w.zero_state()),
        Controller::Pid(_) => None,
    };
    let mut pid = match controller {
        Controller::Pid(g) => Some(PidController::new(*g)),
        Controller::Policy(_) => None,
    };
    let mut attitude = Vec::new();
    let mut rows = Vec::new();
    let mut total_reward = 0.0;
    loop {
        let command = match (controller, policy_state.as_mut(), pid.as_mut()) {
            (Controller::Policy(w), Some(state), _) => {
                let out = w.policy_step(&obs.to_array(), state)?;
                let squashed: Vec<f64> = out.mean.iter().map(|m| m.tanh()).collect();
                scale_action(&squashed, &bounds)
            }
            (Controller::Pid(g), _, Some(pid)) => pid.command(env.state().depth() - g.target_depth, period),
            _ => unreachable!("controller state matches its kind"),
        };
        let (next, reward, done, info) = env.step_command(&command)?;
        if let Some(d) = info.diagnostic {
            return Err(Error::NonFinite(d));
        }
        for (_, s) in env.recorded_substeps() {
            let (roll, pitch, _) = s.euler_angles();
            attitude.push((roll, pitch));
        }
        total_reward += reward;
        rows.push(TraceRow {
            t: env.elapsed(),
            state: *env.state(),
            command,
            reward,
        });
        obs = next;
        if done {
            env.set_recording(false);
            return Ok(EpisodeResult {
                mask: info.fault_mask,
                success: info.success,
                elapsed: info.elapsed,
                distance: env.distance_from_start(),
                total_reward,
                attitude,
                rows,
            });
        }
    }
}

/// Outcome for one fault mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskReport {
    pub mask: String,
    pub trials: usize,
    pub successes: usize,
    /// Mean time to surface over successful trials, s.
    pub mean_time: Option<f64>,
    /// Mean horizontal distance from the start at surfacing, m.
    pub mean_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub controller: String,
    pub platform: Platform,
    pub seed: u64,
    pub rows: Vec<MaskReport>,
    /// Standard deviation of roll and pitch over every substep of every trial.
    pub roll_std: f64,
    pub pitch_std: f64,
}

fn std_dev(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count();
    if n == 0 {
        return 0.0;
    }
    let mean = v.clone().sum::<f64>() / n as f64;
    (v.map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl EvalReport {
    pub fn trials(&self) -> usize {
        self.rows.iter().map(|r| r.trials).sum()
    }

    pub fn successes(&self) -> usize {
        self.rows.iter().map(|r| r.successes).sum()
    }

    pub fn success_rate(&self) -> f64 {
        match self.trials() {
            0 => 0.0,
            n => self.successes() as f64 / n as f64,
        }
    }

    /// `24/28 (85.7%)`.
    pub fn success_summary(&self) -> String {
        format!("{}/{} ({:.1}%)", self.successes(), self.trials(), 100.0 * self.success_rate())
    }

    /// Per-mask table plus a total line.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} on {} (seed {})", self.controller, self.platform, self.seed);
        let _ = writeln!(s, "{:<12} {:>9} {:>10} {:>11}", "fault", "success", "time [s]", "distance [m]");
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:>9} {:>10} {:>11}",
                r.mask,
                format!("{}/{}", r.successes, r.trials),
                opt(r.mean_time),
                opt(r.mean_distance)
            );
        }
        let _ = writeln!(
            s,
            "{:<12} {:>9}  roll std {:.3} rad, pitch std {:.3} rad",
            "total",
            self.success_summary(),
            self.roll_std,
            self.pitch_std
        );
        s
    }

    /// CSV with one row per mask. The first line is a `#` comment carrying
    /// the config hash and seed.
    pub fn write_csv(&self, path: &Path, config_hash: &str) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# config_hash={config_hash} seed={} controller={}", self.seed, self.controller)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["fault_mask", "trials", "successes", "mean_time_s", "mean_distance_m"])?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            for r in &self.rows {
                w.write_record([
                    r.mask.clone(),
                    r.trials.to_string(),
                    r.successes.to_string(),
                    opt(r.mean_time),
                    opt(r.mean_distance),
                ])?;
            }
            w.write_record([
                "all".to_string(),
                self.trials().to_string(),
                self.successes().to_string(),
                String::new(),
                String::new(),
            ])?;
            w.flush()?;
        }
        writeln!(out, "# roll_std={} pitch_std={}", self.roll_std, self.pitch_std)?;
        write_file(path, &out)
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Run `trials` episodes per mask. Trial `k` of mask `m` uses the same
/// episode seed for every controller, so comparisons see identical
/// randomization and starting attitudes.
pub fn evaluate(
    env: &SurfacingEnv,
    controller: Controller<'_>,
    masks: &[FaultMask],
    trials: usize,
    seed: u64,
) -> Result<EvalReport> {
    let mut env = env.clone();
    let mut rows = Vec::with_capacity(masks.len());
    let mut attitude = Vec::new();
    for (m, mask) in masks.iter().enumerate() {
        env.fault_override = Some(mask.clone());
        let (mut times, mut dists, mut wins) = (Vec::new(), Vec::new(), 0);
        for k in 0..trials {
            let s = derive_seed(seed, EVAL_STREAM, (m * trials + k) as u64);
            let r = run_episode(&mut env, controller, s)?;
            attitude.extend(r.attitude);
            if r.success {
                wins += 1;
                times.push(r.elapsed);
                dists.push(r.distance);
            }
        }
        rows.push(MaskReport {
            mask: mask.label(),
            trials,
            successes: wins,
            mean_time: mean(&times),
            mean_distance: mean(&dists),
        });
    }
    Ok(EvalReport {
        controller: controller.name().to_string(),
        platform: env.platform(),
        seed,
        rows,
        roll_std: std_dev(attitude.iter().map(|a| a.0)),
        pitch_std: std_dev(attitude.iter().map(|a| a.1)),
    })
}

/// RL policy against the PID baseline over the enumerated fin-fault set.
pub fn compare(
    env: &SurfacingEnv,
    weights: &NetworkWeights,
    gains: &PidGains,
    trials: usize,
    seed: u64,
) -> Result<(EvalReport, EvalReport)> {
    let masks = enumerate_fault_set(env.platform())?;
    let rl = evaluate(env, Controller::Policy(weights), &masks, trials, seed)?;
    let pid = evaluate(env, Controller::Pid(gains), &masks, trials, seed)?;
    Ok((rl, pid))
}

/// One row per controller: success counts and attitude spread.
pub fn comparison_table(reports: &[&EvalReport]) -> String {
    let mut s = format!("{:<10} {:>16} {:>14} {:>15}\n", "controller", "success", "roll std [rad]", "pitch std [rad]");
    for r in reports {
        let _ = writeln!(
            s,
            "{:<10} {:>16} {:>14.3} {:>15.3}",
            r.controller,
            r.success_summary(),
            r.roll_std,
            r.pitch_std
        );
    }
    s
}

pub fn write_comparison_csv(path: &Path, reports: &[&EvalReport], config_hash: &str) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# config_hash={config_hash} seed={}", reports.first().map_or(0, |r| r.seed))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["controller", "successes", "trials", "roll_std_rad", "pitch_std_rad"])?;
        for r in reports {
            w.write_record([
                r.controller.clone(),
                r.successes().to_string(),
                r.trials().to_string(),
                r.roll_std.to_string(),
                r.pitch_std.to_string(),
            ])?;
        }
        w.flush()?;
    }
    write_file(path, &out)
}

/// Per-step trajectory CSV: time, pose, body velocities, the command and
/// the step reward.
pub fn write_trajectory_csv(path: &Path, result: &EpisodeResult, config_hash: &str, seed: u64) -> Result<()> {
    let mut out = Vec::new();
    writeln!(
        out,
        "# config_hash={config_hash} seed={seed} fault_mask={} success={}",
        result.mask.label(),
        result.success
    )?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let n = result.mask.platform.action_dim();
        let mut header: Vec<String> = ["t", "x", "y", "z", "qw", "qx", "qy", "qz", "u", "v", "w", "p", "q", "r"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..n).map(|i| format!("a{i}")));
        header.push("reward".into());
        w.write_record(&header)?;
        for row in &result.rows {
            let s = &row.state;
            let q = s.orientation.quaternion();
            let mut rec = vec![
                row.t,
                s.position.x,
                s.position.y,
                s.position.z,
                q.w,
                q.i,
                q.j,
                q.k,
            ];
            rec.extend(s.nu().iter());
            rec.extend(&row.command);
            rec.push(row.reward);
            w.write_record(rec.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
    }
    write_file(path, &out)
}
