//! Oscillating fins of the turtle-like robot.
//!
//! Each fin rotates about a lateral shaft. The fin angle `phi` is measured in
//! the body x-z plane: the fin's thrust axis is `t(phi) = (cos phi, 0, sin phi)`
//! and the blade trails opposite to it, so `phi = pi/2` pushes the body up.
//!
//! Forces use a quasi-steady flat plate evaluated at the blade mid-chord:
//! `L = 0.5 rho V^2 A C_L(alpha)`, `D = 0.5 rho V^2 A C_D(alpha)` with
//! `C_L = c_l sin(2 alpha)` and `C_D = c_d0 + c_d1 (1 - cos(2 alpha))`. They are
//! resolved on the fin frame with the flow angle `beta`:
//! `f_x = D sin(beta) + L cos(beta)`, `f_z = -L sin(beta) + D cos(beta)`,
//! where fin x is the blade normal and fin z the thrust axis.
//!
//! A purely rigid plate oscillating symmetrically produces zero mean force,
//! so the angle of attack includes a passive feathering term
//! `alpha = beta + feather_angle * tanh(w_n / feather_speed)` that turns the
//! blade toward the stroke and yields net thrust along the thrust axis.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::servo_step;
use crate::dynamics::{BodyState, Wrench};
use crate::error::{Error, Result};
use crate::faults::FaultMask;

/// Oscillation profile: `phi(t) = amplitude sin(frequency t + phase) + center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinProfile {
    pub amplitude: f64,
    pub center: f64,
    /// Oscillation rate, rad/s.
    pub frequency: f64,
    pub phase: f64,
}

impl FinProfile {
    /// Profile that holds a constant angle.
    pub fn hold(angle: f64) -> Self {
        Self {
            amplitude: 0.0,
            center: angle,
            frequency: 0.0,
            phase: 0.0,
        }
    }
}

/// Servo target `t` seconds after the profile was latched.
pub fn fin_target_angle(profile: &FinProfile, t: f64) -> f64 {
    profile.amplitude * (profile.frequency * t + profile.phase).sin() + profile.center
}

/// Resolve lift and drag on the fin frame for a flow at angle `beta`.
pub fn fin_force_components(beta: f64, lift: f64, drag: f64) -> (f64, f64) {
    let (s, c) = beta.sin_cos();
    (drag * s + lift * c, -lift * s + drag * c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinHydrodynamics {
    pub lift_coefficient: f64,
    pub drag_min: f64,
    pub drag_span: f64,
    pub feather_angle: f64,
    pub feather_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fin {
    /// Shaft position, body frame, m.
    pub mount: [f64; 3],
    pub area: f64,
    /// Distance from the shaft to the blade mid-chord, m.
    pub lever: f64,
    pub slew_rate: f64,
    #[serde(skip)]
    pub angle: f64,
    #[serde(skip)]
    pub rate: f64,
    #[serde(skip, default = "default_profile")]
    pub profile: FinProfile,
    #[serde(skip)]
    pub profile_start: f64,
}

fn default_profile() -> FinProfile {
    FinProfile::hold(0.0)
}

impl Fin {
    pub fn thrust_axis(&self) -> Vector3<f64> {
        let (s, c) = self.angle.sin_cos();
        Vector3::new(c, 0.0, s)
    }

    pub fn normal_axis(&self) -> Vector3<f64> {
        let (s, c) = self.angle.sin_cos();
        Vector3::new(-s, 0.0, c)
    }

    /// Blade mid-chord in the body frame.
    pub fn mid_chord(&self) -> Vector3<f64> {
        Vector3::from(self.mount) - self.lever * self.thrust_axis()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinPlant {
    /// FL, FR, RL, RR.
    pub fins: Vec<Fin>,
    pub hydrodynamics: FinHydrodynamics,
    pub max_amplitude: f64,
    /// Upper bound on the oscillation rate, rad/s.
    pub max_frequency: f64,
    /// Servo angle at episode start; broken fins stay here.
    pub initial_angle: f64,
}

impl FinPlant {
    pub fn validate(&self) -> Result<()> {
        if self.fins.len() != 4 {
            return Err(Error::InvalidParams(format!(
                "U-CAT needs 4 fins, got {}",
                self.fins.len()
            )));
        }
        for (i, f) in self.fins.iter().enumerate() {
            if !(f.area > 0.0 && f.lever > 0.0 && f.slew_rate > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "fin {i}: area, lever and slew_rate must be positive"
                )));
            }
        }
        let h = &self.hydrodynamics;
        if h.drag_min < 0.0 || h.drag_span < 0.0 || h.feather_speed <= 0.0 {
            return Err(Error::InvalidParams("invalid fin hydrodynamic coefficients".into()));
        }
        if !(self.max_amplitude >= 0.0 && self.max_frequency >= 0.0 && self.max_amplitude <= PI) {
            return Err(Error::InvalidParams("invalid fin profile limits".into()));
        }
        Ok(())
    }

    /// Move every healthy fin toward its profile target at time `t_end`.
    /// Broken fins are pinned at their frozen angle.
    pub fn advance(&mut self, mask: &FaultMask, t_end: f64, dt: f64) {
        for (i, fin) in self.fins.iter_mut().enumerate() {
            if mask.is_faulty(i) {
                fin.angle = mask.frozen_angles[i];
                fin.rate = 0.0;
                continue;
            }
            let target = fin_target_angle(&fin.profile, t_end - fin.profile_start);
            let next = servo_step(fin.angle, target, fin.slew_rate, dt);
            fin.rate = (next - fin.angle) / dt;
            fin.angle = next;
        }
    }
}

/// Body wrench from all fins at their current angles and rates.
pub fn fin_wrench(plant: &FinPlant, state: &BodyState, mask: &FaultMask, rho: f64) -> Wrench {
    let h = &plant.hydrodynamics;
    let mut total = Wrench::zero();
    for (i, fin) in plant.fins.iter().enumerate() {
        let rate = if mask.is_faulty(i) { 0.0 } else { fin.rate };
        let t_axis = fin.thrust_axis();
        let n_axis = fin.normal_axis();
        let r = fin.mid_chord();
        let v = state.linear_velocity + state.angular_velocity.cross(&r) - fin.lever * rate * n_axis;
        // water velocity relative to the blade
        let (wn, wt) = (-v.dot(&n_axis), -v.dot(&t_axis));
        let v2 = wn * wn + wt * wt;
        if v2 == 0.0 {
            continue;
        }
        let beta = wn.atan2(wt);
        let alpha = beta + h.feather_angle * (wn / h.feather_speed).tanh();
        let q = 0.5 * rho * v2 * fin.area;
        let lift = q * h.lift_coefficient * (2.0 * alpha).sin();
        let drag = q * (h.drag_min + h.drag_span * (1.0 - (2.0 * alpha).cos()));
        let (fx, fz) = fin_force_components(beta, lift, drag);
        total += Wrench::from_force_at(fx * n_axis + fz * t_axis, r);
    }
    total
}
