//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=1,2,3` runs a subset (development aid).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ftsurf::actuators::{fin_force_components, fin_target_angle, rudder_coefficients, FinProfile};
use ftsurf::dynamics::{coriolis_matrix, dynamics_step, BodyState, RigidBodyParams, Wrench};
use ftsurf::faults::{enumerate_fault_set, sample_faults, FaultSampling};
use ftsurf::harness::{compare, run_training, EvalReport, ExperimentConfig, TrainSummary, TransferSpec};
use ftsurf::nn::{load_checkpoint, NetConfig, NetworkWeights};
use ftsurf::ppo::{log_prob, ppo_loss, EpisodeRollout, LossConfig, PreparedEpisode};
use ftsurf::presets::PlatformModel;
use ftsurf::task::{goal_reward, step_reward, RewardWeights};
use ftsurf::Platform;
use nalgebra::{Matrix6, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- 1

fn formula_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;

    let (cl0, cd0) = rudder_coefficients(0.0);
    let printed_zero = cl0 == 0.0 && cd0 == 0.058202;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(-PI..PI);
        let (cl, cd) = rudder_coefficients(a);
        // factored forms of the printed polynomials
        let cl_ref = a * (0.13058 + 0.051143 * a.abs());
        let cd_ref = 0.058202 + a * a * 0.0015587;
        worst = worst.max((cl - cl_ref).abs()).max((cd - cd_ref).abs());
    }

    for _ in 0..1000 {
        let p = FinProfile {
            amplitude: rng.random_range(0.0..1.0),
            center: rng.random_range(-PI..PI),
            frequency: rng.random_range(0.0..20.0),
            phase: rng.random_range(-PI..PI),
        };
        let t: f64 = rng.random_range(0.0..10.0);
        let reference = p.amplitude * (p.frequency * t + p.phase).sin() + p.center;
        worst = worst.max((fin_target_angle(&p, t) - reference).abs());

        let (beta, lift, drag): (f64, f64, f64) =
            (rng.random_range(-PI..PI), rng.random_range(-5.0..5.0), rng.random_range(0.0..5.0));
        let (fx, fz) = fin_force_components(beta, lift, drag);
        worst = worst
            .max((fx - (drag * beta.sin() + lift * beta.cos())).abs())
            .max((fz - (-lift * beta.sin() + drag * beta.cos())).abs());
    }

    let w = RewardWeights::default();
    let table = (w.k1, w.k2, w.k3, w.k4, w.k5) == (4.0, 0.4, -4.0, -20.0, 500.0);
    for _ in 0..1000 {
        let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let q = UnitQuaternion::from_scaled_axis(axis * rng.random_range(0.0..PI));
        let v = Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let state = BodyState {
            orientation: q,
            linear_velocity: v,
            ..BodyState::at_rest(Vector3::new(0.0, 0.0, -3.0))
        };
        // rotation matrix rows, written out
        let r = q.to_rotation_matrix();
        let m = r.matrix();
        let vz_world = m[(2, 0)] * v.x + m[(2, 1)] * v.y + m[(2, 2)] * v.z;
        let z_hat_up = m[(2, 2)];
        let reference = 4.0 * vz_world + 0.4 * z_hat_up;
        worst = worst.max((step_reward(&state, &w) - reference).abs());

        let f: [f64; 2] = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let s: [f64; 2] = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let tl: f64 = rng.random_range(1.0..100.0);
        let t = rng.random_range(0.0..tl);
        let d = ((f[0] - s[0]).powi(2) + (f[1] - s[1]).powi(2)).sqrt();
        let reference = -4.0 * d + -20.0 * (tl - t) / tl + 500.0;
        worst = worst.max((goal_reward(f, s, t, tl, &w, true) - reference).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        printed_zero && table && worst <= 1e-12 && secs < 1.0,
        format!(
            "C_L(0) = {cl0}, C_D(0) = {cd0}; table weights {}; worst deviation {worst:.1e}; {secs:.2} s",
            if table { "match" } else { "DIFFER" }
        ),
    )
}

// ---------------------------------------------------------------- 2

fn random_spd(rng: &mut ChaCha8Rng) -> Matrix6<f64> {
    let a = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    a * a.transpose() + Matrix6::from_diagonal(&Vector6::from([20.0, 25.0, 30.0, 1.0, 2.0, 2.0]))
}

fn dynamics_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // Coriolis energy neutrality, presets and random full inertia matrices
    let mut worst_power: f64 = 0.0;
    for p in Platform::ALL {
        let base = PlatformModel::default_for(p).body;
        for k in 0..500 {
            let params = if k % 2 == 0 { base.clone() } else { base.with_mass_matrix(random_spd(&mut rng)).unwrap() };
            let nu = Vector6::from_fn(|_, _| rng.random_range(-2.0..2.0));
            worst_power = worst_power.max(nu.dot(&(coriolis_matrix(&params, &nu) * nu)).abs());
        }
    }

    // Kinetic energy never grows under damping alone
    let mut monotone = true;
    for p in Platform::ALL {
        let b = PlatformModel::default_for(p).body;
        let params = RigidBodyParams::new(
            *b.mass_matrix(),
            b.linear_damping,
            b.quadratic_damping,
            b.weight,
            b.weight,
            Vector3::zeros(),
            b.fluid_density,
        )
        .unwrap();
        let mut s = BodyState {
            linear_velocity: Vector3::new(1.0, -0.5, 0.7),
            angular_velocity: Vector3::new(0.8, -0.6, 1.2),
            ..BodyState::at_rest(Vector3::new(0.0, 0.0, -5.0))
        };
        let mut e = params.kinetic_energy(&s);
        for _ in 0..2000 {
            s = dynamics_step(&s, &params, &Wrench::zero(), 0.05);
            let next = params.kinetic_energy(&s);
            if next > e {
                monotone = false;
            }
            e = next;
        }
    }

    // Neutral, coincident, at rest: nothing moves
    let neutral = RigidBodyParams::diagonal([30.0, 30.0, 30.0, 2.0, 2.0, 2.0], 200.0).unwrap();
    let rest = BodyState::at_rest(Vector3::new(1.0, 2.0, -3.0));
    let mut s = rest;
    for _ in 0..1000 {
        s = dynamics_step(&s, &neutral, &Wrench::zero(), 0.05);
    }
    let fixed = s == rest;

    // Quaternion norm over 1e5 tumbling steps
    let params = RigidBodyParams::diagonal([30.0, 30.0, 30.0, 0.5, 1.0, 1.5], 200.0).unwrap();
    let mut s = BodyState {
        angular_velocity: Vector3::new(1.3, -0.7, 2.1),
        ..BodyState::at_rest(Vector3::zeros())
    };
    let mut drift: f64 = 0.0;
    for _ in 0..100_000 {
        s = dynamics_step(&s, &params, &Wrench::zero(), 0.05);
        drift = drift.max((s.orientation.quaternion().norm() - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_power <= 1e-10 && monotone && fixed && drift < 1e-9 && secs < 10.0,
        format!(
            "max |nu^T C nu| {worst_power:.1e}; energy monotone {monotone}; equilibrium fixed {fixed}; quaternion drift {drift:.1e}; {secs:.1} s"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = NetConfig {
        input_dim: 8,
        hidden: 4,
        layers: 2,
        action_dim: 3,
    };
    let mut w = NetworkWeights::init(&net, &mut rng).unwrap();
    // non-trivial heads and log-std so every term carries gradient
    for p in [&mut w.actor.head.weight, &mut w.critic.head.weight] {
        for v in p.as_mut_slice() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    for s in &mut w.log_std {
        *s = rng.random_range(-1.0..0.0);
    }

    let steps = 5;
    let observations: Vec<f64> = (0..steps * 8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let trace = w.actor.forward_seq(&observations).unwrap();
    let mut raw = Vec::new();
    let mut old_lp = Vec::new();
    for t in 0..steps {
        let mean = &trace.outputs[t * 3..(t + 1) * 3];
        let r: Vec<f64> = mean.iter().map(|m| m + rng.random_range(-0.8..0.8)).collect();
        let lp = log_prob(&r, mean, &w.log_std);
        // ratios of ~0.9..1.1 inside the clip range, one step well outside
        let shift = if t == 2 { 0.6 } else { rng.random_range(-0.1..0.1) };
        old_lp.push(lp - shift);
        raw.extend(r);
    }
    let actions: Vec<f64> = raw.iter().map(|u| u.tanh()).collect();
    let rollout = EpisodeRollout {
        seed: 0,
        obs_dim: 8,
        action_dim: 3,
        observations,
        raw_actions: raw,
        actions,
        log_probs: old_lp,
        values: vec![0.0; steps],
        rewards: vec![0.0; steps],
        dones: (0..steps).map(|t| t == steps - 1).collect(),
        success: false,
        condition: String::new(),
        distance: 0.0,
    };
    let ep = PreparedEpisode {
        rollout,
        advantages: (0..steps).map(|_| rng.random_range(-1.5..1.5)).collect(),
        returns: (0..steps).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let cfg = LossConfig {
        clip: 0.2,
        value_coef: 0.5,
        entropy_coef: 0.01,
        bptt_window: None,
    };
    let loss = |w: &NetworkWeights| ppo_loss(w, &[&ep], &cfg, false, None).unwrap().0.loss;
    let (_, grads) = ppo_loss(&w, &[&ep], &cfg, true, None).unwrap();
    let analytic: Vec<f64> = grads.unwrap().params().concat();

    let h = 1e-5;
    let (mut worst_rel, mut failures, mut k) = (0.0f64, 0, 0);
    let shapes: Vec<usize> = w.params().iter().map(|p| p.len()).collect();
    for (pi, &len) in shapes.iter().enumerate() {
        for j in 0..len {
            let orig = w.params()[pi][j];
            w.params_mut()[pi][j] = orig + h;
            let up = loss(&w);
            w.params_mut()[pi][j] = orig - h;
            let down = loss(&w);
            w.params_mut()[pi][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[k];
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-3 {
                worst_rel = worst_rel.max((a - numeric).abs() / scale);
            }
            // relative 1e-6 with an absolute floor above central-difference round-off
            if (a - numeric).abs() > 1e-6 * scale + 1e-9 {
                failures += 1;
            }
            k += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!("{k} parameters, {failures} mismatches, worst relative error {worst_rel:.1e} (|g| > 1e-3); {secs:.2} s"),
    )
}

// ---------------------------------------------------------------- 4

fn fault_properties() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    for p in Platform::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sampling = FaultSampling::for_platform(p);
        for _ in 0..100_000 {
            let m = sample_faults(p, &sampling, 0.0, &mut rng);
            let ok = m.satisfies_rules(1)
                && match p {
                    Platform::Hovering => m.count() <= 7 && (4..8).any(|i| !m.faulty[i]),
                    Platform::Torpedo => m.count() <= 3 && !m.faulty[4] && (!m.faulty[0] || !m.faulty[2]),
                    Platform::Ucat => (1..=3).contains(&m.count()),
                };
            if !ok {
                bad += 1;
            }
        }
    }
    let set = enumerate_fault_set(Platform::Ucat).unwrap();
    let mut labels: Vec<String> = set.iter().map(|m| m.label()).collect();
    labels.sort();
    labels.dedup();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0 && set.len() == 14 && labels.len() == 14 && secs < 5.0,
        format!("3 x 1e5 sampled masks, {bad} violations; U-CAT set has {} distinct masks; {secs:.2} s", labels.len()),
    )
}

// ---------------------------------------------------------------- 5, 6, 7

const SEEDS: [u64; 3] = [0, 1, 2];

/// Small-scale surfacing setup shared by the training criteria.
///
/// The torpedo acts every 0.5 s with a larger step size: at 10 Hz its
/// exploration noise averages out in the hull response and the policy never
/// discovers that thrust only helps together with pitch-up rudder.
fn desk_config(platform: Platform, seed: u64, dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default_for(platform);
    c.seed = seed;
    c.output_dir = dir.to_path_buf();
    c.checkpoint_every = 0;
    c.episode.start_depth = 2.0;
    c.episode.time_limit = 20.0;
    c.train.success_threshold = 0.9;
    c.train.success_window = 100;
    c.train.max_episodes = 3000;
    if platform == Platform::Torpedo {
        c.episode.action_period = 0.5;
        c.train.learning_rate = 1e-3;
    }
    c
}

fn episodes(s: &TrainSummary) -> String {
    s.episodes_to_criterion
        .map_or(format!(">{}", s.episodes), |e| e.to_string())
}

fn train_logged(label: &str, cfg: &ExperimentConfig, transfer: Option<TransferSpec<'_>>) -> TrainSummary {
    let s = run_training(cfg, transfer, None, |_| {}).unwrap_or_else(|e| panic!("{label}: {e}"));
    println!("    {label}: criterion at {} episodes ({:.0} s)", episodes(&s), s.wall_time_s);
    s
}

fn hovering_training(root: &Path) -> (Outcome, Vec<PathBuf>) {
    let start = Instant::now();
    let mut reached = 0;
    let mut ckpts = Vec::new();
    let mut counts = Vec::new();
    for seed in SEEDS {
        let cfg = desk_config(Platform::Hovering, seed, &root.join(format!("hovering_{seed}")));
        let s = train_logged(&format!("hovering seed {seed}"), &cfg, None);
        if s.episodes_to_criterion.is_some_and(|e| e <= 3000) {
            reached += 1;
        }
        counts.push(episodes(&s));
        ckpts.push(s.final_checkpoint);
    }
    let mins = start.elapsed().as_secs_f64() / 60.0;
    (
        outcome(
            reached >= 2,
            format!("{reached}/3 seeds reached 90 % over 100 episodes within 3000 (episodes: {}); {mins:.1} min", counts.join(", ")),
        ),
        ckpts,
    )
}

fn transfer_trend(root: &Path, hovering: &[PathBuf]) -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    let mut pairs = Vec::new();
    for (seed, src) in SEEDS.iter().zip(hovering) {
        let source = load_checkpoint(src).unwrap().weights().unwrap();
        let vanilla_cfg = desk_config(Platform::Torpedo, *seed, &root.join(format!("torpedo_vanilla_{seed}")));
        let vanilla = train_logged(&format!("torpedo vanilla seed {seed}"), &vanilla_cfg, None);
        let transfer_cfg = desk_config(Platform::Torpedo, *seed, &root.join(format!("torpedo_layer1_{seed}")));
        let spec = TransferSpec {
            source: &source,
            layers: &[1],
            origin: src.display().to_string(),
        };
        let transfer = train_logged(&format!("torpedo layer-1 seed {seed}"), &transfer_cfg, Some(spec));
        let key = |s: &TrainSummary| s.episodes_to_criterion.unwrap_or(usize::MAX);
        if key(&transfer) < key(&vanilla) {
            wins += 1;
        }
        let ratio = match (transfer.episodes_to_criterion, vanilla.episodes_to_criterion) {
            (Some(t), Some(v)) => format!("{:.2}", t as f64 / v as f64),
            _ => "-".into(),
        };
        pairs.push(format!("{}/{} ({ratio})", episodes(&transfer), episodes(&vanilla)));
    }
    let mins = start.elapsed().as_secs_f64() / 60.0;
    outcome(
        wins >= 2,
        format!("transfer beat vanilla in {wins}/3 pairs (layer-1/vanilla: {}); {mins:.1} min", pairs.join(", ")),
    )
}

/// Fin-robot training setup for the controller comparison.
///
/// The observation carries no depth, so a policy trained from 2 m acts the
/// same from any depth. Larger batches with fewer epochs keep the 16-way
/// action gradient from being dominated by noise; the entropy bonus is off
/// so the exploration std cannot grow across all 16 outputs.
fn ucat_config(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default_for(Platform::Ucat);
    c.seed = 0;
    c.output_dir = dir.to_path_buf();
    c.checkpoint_every = 0;
    c.episode.start_depth = 2.0;
    c.network.initial_std = 0.3;
    c.train.learning_rate = 1e-3;
    c.train.episodes_per_batch = 32;
    c.train.minibatch_episodes = 8;
    c.train.epochs = 5;
    c.train.entropy_coef = 0.0;
    c.train.max_episodes = 3000;
    c
}

/// Evaluation episode for the comparison: the pool trials start 1.65 m deep
/// and count a success within 60 s.
fn pool_trial(mut c: ExperimentConfig) -> ExperimentConfig {
    c.episode.start_depth = 1.65;
    c.episode.time_limit = 60.0;
    c
}

fn comparison_line(rl: &EvalReport, pid: &EvalReport) -> String {
    format!(
        "RL {} roll/pitch std {:.3}/{:.3} rad, PID {} roll/pitch std {:.3}/{:.3} rad",
        rl.success_summary(),
        rl.roll_std,
        rl.pitch_std,
        pid.success_summary(),
        pid.roll_std,
        pid.pitch_std
    )
}

fn baseline_comparison(root: &Path) -> Outcome {
    let start = Instant::now();
    let cfg = ucat_config(&root.join("ucat"));
    let s = train_logged("ucat seed 0", &cfg, None);
    let weights = load_checkpoint(&s.final_checkpoint).unwrap().weights().unwrap();
    let mut eval_cfg = ExperimentConfig::default_for(Platform::Ucat);
    eval_cfg.seed = cfg.seed;
    let pool = pool_trial(eval_cfg.clone());
    let (rl, pid) = compare(&pool.env().unwrap(), &weights, &pool.baseline, 2, pool.seed).unwrap();
    let pass = rl.successes() >= pid.successes() && rl.roll_std < pid.roll_std && rl.pitch_std < pid.pitch_std;
    // Same policy from the 5 m training start, for reference only.
    let (rl5, pid5) = compare(&eval_cfg.env().unwrap(), &weights, &eval_cfg.baseline, 2, eval_cfg.seed).unwrap();
    let mins = start.elapsed().as_secs_f64() / 60.0;
    outcome(
        pass,
        format!(
            "1.65 m / 60 s: {}; (5 m / 75 s: {}); {mins:.1} min",
            comparison_line(&rl, &pid),
            comparison_line(&rl5, &pid5)
        ),
    )
}

// ---------------------------------------------------------------- 8

fn ftsurf(cwd: &Path, args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_ftsurf"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("run ftsurf");
    assert!(
        out.status.success(),
        "ftsurf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tiny_config(platform: Platform, path: &Path) {
    let mut c = ExperimentConfig::default_for(platform);
    c.seed = 5;
    c.episode.time_limit = 3.0;
    c.network.hidden = 8;
    c.network.layers = 2;
    c.train.max_episodes = 16;
    c.train.epochs = 2;
    c.checkpoint_every = 8;
    std::fs::write(path, c.to_toml()).unwrap();
}

fn files_equal(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

/// Every command runs inside its own run directory with relative paths, so
/// the paths recorded in checkpoint metadata are identical across runs.
fn cli_determinism(root: &Path) -> Outcome {
    let start = Instant::now();
    let configs = root.join("configs");
    std::fs::create_dir_all(&configs).unwrap();
    let cfg = |p: Platform| configs.join(format!("{p}.toml")).to_str().unwrap().to_string();
    for p in Platform::ALL {
        tiny_config(p, Path::new(&cfg(p)));
    }
    let runs: Vec<PathBuf> = (0..2).map(|k| root.join(format!("run{k}"))).collect();
    for dir in &runs {
        std::fs::create_dir_all(dir).unwrap();
        let run = |args: &[&str]| ftsurf(dir, args);
        for p in [Platform::Hovering, Platform::Ucat] {
            let (c, out) = (cfg(p), p.to_string());
            let ck = format!("{out}/final.ckpt");
            run(&["train", "--config", &c, "--output", &out, "--threads", "1"]);
            run(&["eval", "--config", &c, "--checkpoint", &ck, "--mask", "none", "--trials", "2", "--out", &format!("{out}/eval.csv")]);
            run(&["replay", "--config", &c, "--checkpoint", &ck, "--out", &format!("{out}/replay.csv")]);
        }
        run(&["compare", "--config", &cfg(Platform::Ucat), "--checkpoint", "ucat/final.ckpt", "--trials", "1", "--out", "ucat/compare.csv"]);
        run(&["train", "--config", &cfg(Platform::Torpedo), "--output", "torpedo", "--threads", "1", "--transfer-from", "hovering/final.ckpt", "--layers", "1"]);
        run(&["transfer", "--from", "hovering/final.ckpt", "--to", "torpedo/final.ckpt", "--layers", "1,2", "--out", "transfer.ckpt"]);
    }
    let mut names = vec!["transfer.ckpt".to_string(), "ucat/compare.csv".to_string()];
    for p in [Platform::Hovering, Platform::Ucat] {
        for n in ["training_log.csv", "final.ckpt", "checkpoints/episode_000008.ckpt", "eval.csv", "replay.csv"] {
            names.push(format!("{p}/{n}"));
        }
    }
    names.extend(["torpedo/training_log.csv".to_string(), "torpedo/final.ckpt".to_string()]);
    let differing: Vec<&String> = names.iter().filter(|n| !files_equal(&runs[0].join(n), &runs[1].join(n))).collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        differing.is_empty(),
        format!(
            "train/eval/replay/compare/transfer run twice; {}/{} output files bitwise identical{}; {secs:.1} s",
            names.len() - differing.len(),
            names.len(),
            if differing.is_empty() { String::new() } else { format!(" (differ: {differing:?})") }
        ),
    )
}

// ----------------------------------------------------------------

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("criterion {n} {name}: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    if wanted(1) {
        report(1, "formula oracles", formula_oracles());
    }
    if wanted(2) {
        report(2, "dynamics properties", dynamics_properties());
    }
    if wanted(3) {
        report(3, "PPO gradient check", gradient_check());
    }
    if wanted(4) {
        report(4, "fault constraints", fault_properties());
    }
    let mut hovering = Vec::new();
    if wanted(5) || wanted(6) {
        let (o, ck) = hovering_training(root);
        hovering = ck;
        if wanted(5) {
            report(5, "desk-scale hovering training", o);
        }
    }
    if wanted(6) {
        report(6, "layer-1 transfer trend", transfer_trend(root, &hovering));
    }
    if wanted(7) {
        report(7, "RL vs PID baseline", baseline_comparison(root));
    }
    if wanted(8) {
        report(8, "CLI determinism", cli_determinism(root));
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
