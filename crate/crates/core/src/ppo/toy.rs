use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::task::{Environment, Transition};

/// A point mass below the surface with one ideal vertical thruster.
///
/// Observation `[depth / 2, velocity]`, one action in `[-1, 1]` scaled to
/// the thrust limit. Reward is the upward distance travelled, plus a bonus
/// on reaching the surface.
#[derive(Debug, Clone)]
pub struct PointMassEnv {
    pub mass: f64,
    pub damping: f64,
    pub max_force: f64,
    pub dt: f64,
    pub time_limit: f64,
    pub bonus: f64,
    depth: f64,
    velocity: f64,
    t: f64,
    done: bool,
}

impl Default for PointMassEnv {
    fn default() -> Self {
        Self {
            mass: 1.0,
            damping: 1.0,
            max_force: 1.0,
            dt: 0.2,
            time_limit: 8.0,
            bonus: 5.0,
            depth: 0.0,
            velocity: 0.0,
            t: 0.0,
            done: true,
        }
    }
}

impl PointMassEnv {
    fn obs(&self) -> Vec<f64> {
        vec![self.depth / 2.0, self.velocity]
    }
}

impl Environment for PointMassEnv {
    fn observation_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.depth = rng.random_range(1.5..2.5);
        self.velocity = 0.0;
        self.t = 0.0;
        self.done = false;
        Ok(self.obs())
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.done {
            return Err(Error::InvalidParams("episode finished; call reset".into()));
        }
        if action.len() != 1 {
            return Err(Error::Dimension {
                what: "action",
                expected: 1,
                got: action.len(),
            });
        }
        let force = action[0].clamp(-1.0, 1.0) * self.max_force;
        self.velocity += self.dt * (force - self.damping * self.velocity) / self.mass;
        let rise = self.velocity * self.dt;
        self.depth -= rise;
        self.t += self.dt;
        let success = self.depth <= 0.0;
        self.done = success || self.t >= self.time_limit - 1e-9;
        Ok(Transition {
            observation: self.obs(),
            reward: rise + if success { self.bonus } else { 0.0 },
            done: self.done,
            success,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_thrust_surfaces() {
        let mut env = PointMassEnv::default();
        env.reset(0).unwrap();
        let tr = loop {
            let tr = env.step(&[1.0]).unwrap();
            if tr.done {
                break tr;
            }
        };
        assert!(tr.success);
    }

    #[test]
    fn idle_times_out() {
        let mut env = PointMassEnv::default();
        env.reset(0).unwrap();
        let mut n = 0;
        while !env.step(&[0.0]).unwrap().done {
            n += 1;
        }
        assert_eq!(n + 1, 40);
    }
}
