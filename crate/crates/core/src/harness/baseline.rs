//! Depth PID for the fin-driven robot.
//!
//! The controller knows nothing about faults: it turns the depth error into
//! a desired vertical body force and splits that force evenly over all four
//! fins, broken or not.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    /// N per m of depth error.
    pub kp: f64,
    /// N per m s.
    pub ki: f64,
    /// N per m/s.
    pub kd: f64,
    /// Bound on the integral term's accumulated error, m s.
    pub integral_limit: f64,
    /// Fin amplitude per newton of per-fin force, rad/N.
    pub force_to_amplitude: f64,
    pub max_amplitude: f64,
    /// Fixed oscillation rate, rad/s.
    pub frequency: f64,
    /// Depth the controller regulates to, m.
    pub target_depth: f64,
}

impl Default for PidGains {
    /// Tuned once on the healthy robot with a 5 m -> 2.5 m depth step: the
    /// fastest rise with under 0.1 m overshoot. Frozen for all fault cases.
    fn default() -> Self {
        Self {
            kp: 15.0,
            ki: 0.05,
            kd: 4.0,
            integral_limit: 10.0,
            force_to_amplitude: 1.25,
            max_amplitude: 0.8,
            frequency: 4.0 * std::f64::consts::PI,
            target_depth: 0.0,
        }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        let v = [
            self.kp,
            self.ki,
            self.kd,
            self.integral_limit,
            self.force_to_amplitude,
            self.max_amplitude,
            self.frequency,
        ];
        if v.iter().all(|g| *g >= 0.0 && g.is_finite()) && self.target_depth.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams("PID gains must be finite and >= 0".into()))
        }
    }
}

/// Fins the force is divided over. The controller assumes all are healthy.
const ASSUMED_FINS: f64 = 4.0;

/// Oscillation profiles `[A, center, frequency, phase] x 4` for a desired
/// vertical body force (positive up).
pub fn fin_profiles(force: f64, gains: &PidGains) -> Vec<f64> {
    let amplitude = (gains.force_to_amplitude * force.abs() / ASSUMED_FINS).clamp(0.0, gains.max_amplitude);
    let center = if force == 0.0 { 0.0 } else { FRAC_PI_2 * force.signum() };
    [amplitude, center, gains.frequency, 0.0].repeat(4)
}

/// PID with integral clamping. `depth_error` is depth minus target, so a
/// vehicle below the target (positive error) gets an upward force.
#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    integral: f64,
    previous: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
            previous: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.previous = None;
    }

    /// Desired vertical force, N.
    pub fn force(&mut self, depth_error: f64, dt: f64) -> f64 {
        let g = &self.gains;
        self.integral = (self.integral + depth_error * dt).clamp(-g.integral_limit, g.integral_limit);
        let derivative = match self.previous {
            Some(p) if dt > 0.0 => (depth_error - p) / dt,
            _ => 0.0,
        };
        self.previous = Some(depth_error);
        g.kp * depth_error + g.ki * self.integral + g.kd * derivative
    }

    /// Fin command for this control step.
    pub fn command(&mut self, depth_error: f64, dt: f64) -> Vec<f64> {
        let f = self.force(depth_error, dt);
        fin_profiles(f, &self.gains)
    }
}

/// One PID step from a fresh controller.
pub fn pid_baseline(depth_error: f64, gains: &PidGains, dt: f64) -> Vec<f64> {
    PidController::new(*gains).command(depth_error, dt)
}
