use ftsurf::nn::NetConfig;
use ftsurf::ppo::{train, PointMassEnv, TrainConfig};

fn net() -> NetConfig {
    NetConfig {
        input_dim: 2,
        hidden: 8,
        layers: 1,
        action_dim: 1,
    }
}

/// Idle policies barely move the point mass; the trainer must learn to push
/// it to the surface within a few hundred episodes for every seed.
#[test]
fn point_mass_learns_to_surface() {
    for seed in 0..3 {
        let cfg = TrainConfig {
            learning_rate: 3e-3,
            reward_scale: 1.0,
            max_episodes: 800,
            success_window: 50,
            success_threshold: 0.9,
            seed,
            ..TrainConfig::default()
        };
        let (log, w) = train(PointMassEnv::default(), &net(), &cfg, None).unwrap();
        assert!(w.is_finite());
        let reached = log.episodes_to_criterion;
        assert!(reached.is_some(), "seed {seed}: no criterion in {} episodes", log.records.len());
        let early: f64 = log.records[..40].iter().map(|r| r.total_reward).sum::<f64>() / 40.0;
        let late = &log.records[log.records.len() - 40..];
        let late: f64 = late.iter().map(|r| r.total_reward).sum::<f64>() / 40.0;
        assert!(late > early, "seed {seed}: return {early:.2} -> {late:.2}");
    }
}
