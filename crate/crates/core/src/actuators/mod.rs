//! Actuator plants: commands in, body wrench out.

mod fin;
mod rudder;
mod thruster;

pub use fin::{
    fin_force_components, fin_target_angle, fin_wrench, Fin, FinHydrodynamics, FinPlant,
    FinProfile,
};
pub use rudder::{rudder_coefficients, rudder_wrench, Rudder, RudderPlant};
pub use thruster::{thruster_wrench, Thruster, ThrusterGeometry, ThrusterGroup};

use serde::{Deserialize, Serialize};

use crate::dynamics::{BodyState, Wrench};
use crate::error::{Error, Result};
use crate::faults::FaultMask;
use crate::platform::Platform;

/// Move `current` toward `target` by at most `slew_rate * dt`.
pub fn servo_step(current: f64, target: f64, slew_rate: f64, dt: f64) -> f64 {
    debug_assert!(slew_rate > 0.0);
    let reach = slew_rate * dt;
    let delta = target - current;
    if delta.abs() <= reach {
        target
    } else {
        current + reach.copysign(delta)
    }
}

/// Actuators of one vehicle, including servo state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActuatorPlant {
    Thrusters(ThrusterGeometry),
    Rudders(RudderPlant),
    Fins(FinPlant),
}

impl ActuatorPlant {
    pub fn platform(&self) -> Platform {
        match self {
            ActuatorPlant::Thrusters(_) => Platform::Hovering,
            ActuatorPlant::Rudders(_) => Platform::Torpedo,
            ActuatorPlant::Fins(_) => Platform::Ucat,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ActuatorPlant::Thrusters(g) => g.validate(),
            ActuatorPlant::Rudders(r) => r.validate(),
            ActuatorPlant::Fins(f) => f.validate(),
        }
    }

    /// Physical range of each command channel, in command order.
    pub fn command_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            ActuatorPlant::Thrusters(g) => g
                .thrusters
                .iter()
                .map(|t| (-t.max_force, t.max_force))
                .collect(),
            ActuatorPlant::Rudders(r) => {
                let mut b: Vec<_> = r.rudders.iter().map(|x| (-x.max_angle, x.max_angle)).collect();
                b.push((-r.thruster_max_force, r.thruster_max_force));
                b
            }
            ActuatorPlant::Fins(f) => {
                let mut b = Vec::with_capacity(16);
                for _ in &f.fins {
                    b.push((0.0, f.max_amplitude));
                    b.push((-std::f64::consts::PI, std::f64::consts::PI));
                    b.push((0.0, f.max_frequency));
                    b.push((-std::f64::consts::PI, std::f64::consts::PI));
                }
                b
            }
        }
    }

    /// Return servos to their initialization angle.
    pub fn reset(&mut self) {
        match self {
            ActuatorPlant::Thrusters(_) => {}
            ActuatorPlant::Rudders(r) => {
                r.thrust_command = 0.0;
                for x in &mut r.rudders {
                    x.angle = 0.0;
                    x.target = 0.0;
                }
            }
            ActuatorPlant::Fins(f) => {
                let a0 = f.initial_angle;
                for fin in &mut f.fins {
                    fin.angle = a0;
                    fin.rate = 0.0;
                    fin.profile = FinProfile::hold(a0);
                    fin.profile_start = 0.0;
                }
            }
        }
    }

    /// Current servo angles (empty for thrusters). Used to freeze broken
    /// actuators at reset.
    pub fn servo_angles(&self) -> Vec<f64> {
        match self {
            ActuatorPlant::Thrusters(g) => vec![0.0; g.thrusters.len()],
            ActuatorPlant::Rudders(r) => {
                let mut a: Vec<f64> = r.rudders.iter().map(|x| x.angle).collect();
                a.push(0.0);
                a
            }
            ActuatorPlant::Fins(f) => f.fins.iter().map(|x| x.angle).collect(),
        }
    }

    /// Scale force-producing coefficients (thrust limits, rudder and fin
    /// areas) by `factor`. Used for domain randomization.
    pub fn scale_effectiveness(&mut self, factor: f64) {
        match self {
            ActuatorPlant::Thrusters(g) => {
                for t in &mut g.thrusters {
                    t.max_force *= factor;
                }
            }
            ActuatorPlant::Rudders(r) => {
                for x in &mut r.rudders {
                    x.area *= factor;
                }
                r.thruster_max_force *= factor;
            }
            ActuatorPlant::Fins(f) => {
                for x in &mut f.fins {
                    x.area *= factor;
                }
            }
        }
    }

    /// Latch a new (already fault-masked) command at time `t`.
    pub fn set_command(&mut self, command: &[f64], t: f64) -> Result<()> {
        let dim = self.platform().action_dim();
        if command.len() != dim {
            return Err(Error::Dimension {
                what: "actuator command",
                expected: dim,
                got: command.len(),
            });
        }
        match self {
            ActuatorPlant::Thrusters(g) => g.command.copy_from_slice(command),
            ActuatorPlant::Rudders(r) => {
                for (x, &c) in r.rudders.iter_mut().zip(command) {
                    x.target = c.clamp(-x.max_angle, x.max_angle);
                }
                r.thrust_command = command[4];
            }
            ActuatorPlant::Fins(f) => {
                let (max_amp, max_freq) = (f.max_amplitude, f.max_frequency);
                for (fin, c) in f.fins.iter_mut().zip(command.chunks_exact(4)) {
                    fin.profile = FinProfile {
                        amplitude: c[0].clamp(0.0, max_amp),
                        center: c[1],
                        frequency: c[2].clamp(0.0, max_freq),
                        phase: c[3],
                    };
                    fin.profile_start = t;
                }
            }
        }
        Ok(())
    }

    /// Advance servo state over `[t, t + dt]` and return the wrench at the end
    /// of the interval.
    pub fn substep(
        &mut self,
        state: &BodyState,
        mask: &FaultMask,
        t: f64,
        dt: f64,
        rho: f64,
    ) -> Wrench {
        match self {
            ActuatorPlant::Thrusters(g) => thruster_wrench(g, &g.command, mask),
            ActuatorPlant::Rudders(r) => {
                r.advance(mask, dt);
                rudder_wrench(r, state, r.thrust_command, mask, rho)
            }
            ActuatorPlant::Fins(f) => {
                f.advance(mask, t + dt, dt);
                fin_wrench(f, state, mask, rho)
            }
        }
    }
}
