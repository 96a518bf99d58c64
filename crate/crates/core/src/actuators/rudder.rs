//! Torpedo control surfaces.
//!
//! Rudders sit at 90 degree intervals around the hull axis. The mount angle
//! is measured about body +x from body +y: 0 and 180 degrees are horizontal
//! (pitch) rudders, 90 and 270 degrees are vertical (yaw) rudders.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::servo_step;
use crate::dynamics::{BodyState, Wrench};
use crate::error::{Error, Result};
use crate::faults::{FaultMask, TORPEDO_THRUSTER};

/// Lift and drag coefficients of a rudder at angle of attack `alpha` (rad).
pub fn rudder_coefficients(alpha: f64) -> (f64, f64) {
    let cl = 0.13058 * alpha + 0.051143 * alpha * alpha.abs();
    let cd = 0.0015587 * alpha * alpha + 0.058202;
    (cl, cd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rudder {
    /// Mount angle about the hull axis, rad.
    pub mount_angle: f64,
    /// Center of pressure, body frame, m.
    pub position: [f64; 3],
    pub area: f64,
    pub max_angle: f64,
    pub slew_rate: f64,
    #[serde(skip)]
    pub angle: f64,
    #[serde(skip)]
    pub target: f64,
}

impl Rudder {
    /// Direction of positive lift (body frame): `x cross span`.
    pub fn lift_axis(&self) -> Vector3<f64> {
        Vector3::new(0.0, -self.mount_angle.sin(), self.mount_angle.cos())
    }

    pub fn is_pitch_rudder(&self) -> bool {
        self.mount_angle.cos().abs() > std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Four rudders plus the surge thruster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RudderPlant {
    pub rudders: Vec<Rudder>,
    pub thruster_position: [f64; 3],
    pub thruster_max_force: f64,
    /// Fraction of the ideal propeller slipstream speed added to the flow
    /// over the rudders. 0 means the rudders only see surge flow.
    pub wash_fraction: f64,
    /// Propeller disk area used by the slipstream estimate, m^2.
    pub propeller_area: f64,
    #[serde(skip)]
    pub(crate) thrust_command: f64,
}

impl RudderPlant {
    pub fn validate(&self) -> Result<()> {
        if self.rudders.len() != 4 {
            return Err(Error::InvalidParams(format!(
                "torpedo needs 4 rudders, got {}",
                self.rudders.len()
            )));
        }
        for (i, r) in self.rudders.iter().enumerate() {
            if !(r.area > 0.0 && r.max_angle > 0.0 && r.slew_rate > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "rudder R{i}: area, max_angle and slew_rate must be positive"
                )));
            }
            if r.angle.abs() > r.max_angle {
                return Err(Error::InvalidParams(format!("rudder R{i} angle exceeds limit")));
            }
        }
        let pitch = [0, 2].iter().all(|&i| self.rudders[i].is_pitch_rudder());
        let yaw = [1, 3].iter().all(|&i| !self.rudders[i].is_pitch_rudder());
        if !(pitch && yaw) {
            return Err(Error::InvalidParams(
                "R0/R2 must be horizontal (pitch) and R1/R3 vertical (yaw) rudders".into(),
            ));
        }
        if !(self.thruster_max_force > 0.0) || self.wash_fraction < 0.0 || !(self.propeller_area > 0.0) {
            return Err(Error::InvalidParams("invalid torpedo thruster parameters".into()));
        }
        Ok(())
    }

    /// Move rudder servos toward their targets. Broken rudders stay at 0 rad.
    pub fn advance(&mut self, mask: &FaultMask, dt: f64) {
        for (i, r) in self.rudders.iter_mut().enumerate() {
            if mask.is_faulty(i) {
                r.angle = 0.0;
            } else {
                r.angle = servo_step(r.angle, r.target, r.slew_rate, dt).clamp(-r.max_angle, r.max_angle);
            }
        }
    }

    /// Axial flow speed over the rudders (signed, positive from ahead).
    fn axial_flow(&self, surge: f64, thrust: f64, rho: f64) -> f64 {
        let wash = if self.wash_fraction > 0.0 && thrust > 0.0 {
            self.wash_fraction * (thrust / (0.5 * rho * self.propeller_area)).sqrt()
        } else {
            0.0
        };
        surge + wash
    }
}

/// Hydrodynamic wrench of the rudders plus the surge thruster.
///
/// Each rudder produces `L = 0.5 rho V^2 A C_L(alpha)` along its lift axis and
/// `D = 0.5 rho V^2 A C_D(alpha)` along the flow. A broken rudder is held at
/// 0 rad and still contributes parasitic drag.
pub fn rudder_wrench(
    plant: &RudderPlant,
    state: &BodyState,
    thrust_cmd: f64,
    mask: &FaultMask,
    rho: f64,
) -> Wrench {
    let thrust = thrust_cmd.clamp(-plant.thruster_max_force, plant.thruster_max_force);
    let flow = plant.axial_flow(state.linear_velocity.x, thrust, rho);
    let v2 = flow * flow;
    let sign = if flow >= 0.0 { 1.0 } else { -1.0 };

    let mut total = Wrench::from_force_at(
        Vector3::new(thrust, 0.0, 0.0),
        Vector3::from(plant.thruster_position),
    );
    if mask.is_faulty(TORPEDO_THRUSTER) {
        total = Wrench::zero();
    }
    for (i, r) in plant.rudders.iter().enumerate() {
        let alpha = if mask.is_faulty(i) { 0.0 } else { r.angle };
        let (cl, cd) = rudder_coefficients(alpha);
        let q = 0.5 * rho * v2 * r.area;
        let lift = q * cl * sign * r.lift_axis();
        let drag = Vector3::new(-q * cd * sign, 0.0, 0.0);
        total += Wrench::from_force_at(lift + drag, Vector3::from(r.position));
    }
    total
}
