//! Sensor model and per-episode domain randomization.
//!
//! The policy sees the same 8 values on every platform:
//! `[v_z^w, q_w, q_x, q_y, q_z, p, q, r]`. Ground truth is corrupted by
//! zero-mean Gaussian noise and passed through an exponential smoother,
//! standing in for the onboard state estimator. Fault information is never
//! part of the observation.

use nalgebra::{Matrix6, UnitQuaternion, Vector3, Vector6};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::actuators::ActuatorPlant;
use crate::dynamics::{world_vertical_velocity, BodyState, RigidBodyParams};
use crate::error::{Error, Result};

pub const OBS_DIM: usize = 8;

/// Sensor vector shared by all platforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Upward-positive world vertical velocity, m/s.
    pub v_z_w: f64,
    /// Attitude quaternion `[w, x, y, z]`.
    pub attitude: [f64; 4],
    /// Angular rates, rad/s.
    pub angular_rates: [f64; 3],
}

impl Observation {
    pub fn to_array(&self) -> [f64; OBS_DIM] {
        let q = self.attitude;
        let w = self.angular_rates;
        [self.v_z_w, q[0], q[1], q[2], q[3], w[0], w[1], w[2]]
    }

    pub fn from_array(a: &[f64; OBS_DIM]) -> Self {
        Self {
            v_z_w: a[0],
            attitude: [a[1], a[2], a[3], a[4]],
            angular_rates: [a[5], a[6], a[7]],
        }
    }

    pub fn len(&self) -> usize {
        OBS_DIM
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// How the three angular-rate channels are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateFrame {
    /// Body rates `p, q, r`.
    #[default]
    Body,
    /// Roll, pitch and yaw angle derivatives.
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorNoiseConfig {
    /// Standard deviation per observation channel.
    pub std_dev: [f64; OBS_DIM],
    /// Exponential smoothing factor in [0, 1]; 0 disables smoothing.
    pub smoothing: f64,
    #[serde(default)]
    pub rate_frame: RateFrame,
}

impl Default for SensorNoiseConfig {
    fn default() -> Self {
        Self {
            std_dev: [0.02, 0.005, 0.005, 0.005, 0.005, 0.01, 0.01, 0.01],
            smoothing: 0.3,
            rate_frame: RateFrame::Body,
        }
    }
}

impl SensorNoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            std_dev: [0.0; OBS_DIM],
            smoothing: 0.0,
            rate_frame: RateFrame::Body,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.std_dev.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidParams("sensor std_dev must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.smoothing) {
            return Err(Error::InvalidParams("sensor smoothing must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Smoother memory, reset at the start of every episode.
#[derive(Debug, Clone, Default)]
pub struct SensorFilter {
    last: Option<[f64; OBS_DIM]>,
}

impl SensorFilter {
    pub fn reset(&mut self) {
        self.last = None;
    }
}

/// Convert body rates into Euler angle rates at the given attitude.
fn euler_rates(orientation: &UnitQuaternion<f64>, body: &Vector3<f64>) -> Vector3<f64> {
    let (roll, pitch, _) = orientation.euler_angles();
    let (sr, cr) = roll.sin_cos();
    let (tp, cp) = (pitch.tan(), pitch.cos().max(1e-6));
    Vector3::new(
        body.x + sr * tp * body.y + cr * tp * body.z,
        cr * body.y - sr * body.z,
        (sr * body.y + cr * body.z) / cp,
    )
}

/// Noise-free sensor values.
pub fn true_observation(state: &BodyState, frame: RateFrame) -> Observation {
    let q = state.orientation.quaternion();
    let rates = match frame {
        RateFrame::Body => state.angular_velocity,
        RateFrame::Euler => euler_rates(&state.orientation, &state.angular_velocity),
    };
    Observation {
        v_z_w: world_vertical_velocity(state),
        attitude: [q.w, q.i, q.j, q.k],
        angular_rates: [rates.x, rates.y, rates.z],
    }
}

/// Sample one observation: truth + Gaussian noise, exponentially smoothed,
/// attitude renormalized.
pub fn observe<R: Rng + ?Sized>(
    state: &BodyState,
    cfg: &SensorNoiseConfig,
    filter: &mut SensorFilter,
    rng: &mut R,
) -> Observation {
    let mut x = true_observation(state, cfg.rate_frame).to_array();
    for (v, &sd) in x.iter_mut().zip(&cfg.std_dev) {
        if sd > 0.0 {
            *v += sd * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    if let Some(prev) = filter.last {
        let l = cfg.smoothing;
        for (v, p) in x.iter_mut().zip(prev) {
            *v = l * p + (1.0 - l) * *v;
        }
    }
    let n = x[1..5].iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in &mut x[1..5] {
            *v /= n;
        }
    }
    filter.last = Some(x);
    Observation::from_array(&x)
}

/// Multiplicative randomization bounds `(a, b)`: `p <- p (1 + U(a, b))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizationRanges {
    /// Diagonal of the inertia matrix (each entry drawn independently).
    pub inertia: (f64, f64),
    pub linear_damping: (f64, f64),
    pub quadratic_damping: (f64, f64),
    pub buoyancy: (f64, f64),
    /// Thrust limits, rudder and fin areas.
    pub actuator_effectiveness: (f64, f64),
}

impl Default for RandomizationRanges {
    fn default() -> Self {
        Self {
            inertia: (-0.1, 0.1),
            linear_damping: (-0.1, 0.1),
            quadratic_damping: (-0.1, 0.1),
            buoyancy: (-0.01, 0.01),
            actuator_effectiveness: (-0.1, 0.1),
        }
    }
}

impl RandomizationRanges {
    pub fn none() -> Self {
        Self {
            inertia: (0.0, 0.0),
            linear_damping: (0.0, 0.0),
            quadratic_damping: (0.0, 0.0),
            buoyancy: (0.0, 0.0),
            actuator_effectiveness: (0.0, 0.0),
        }
    }

    fn all(&self) -> [(&'static str, (f64, f64)); 5] {
        [
            ("inertia", self.inertia),
            ("linear_damping", self.linear_damping),
            ("quadratic_damping", self.quadratic_damping),
            ("buoyancy", self.buoyancy),
            ("actuator_effectiveness", self.actuator_effectiveness),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (a, b)) in self.all() {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::InvalidParams(format!(
                    "randomization range `{name}` must satisfy a <= b"
                )));
            }
        }
        Ok(())
    }
}

fn draw<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    let (a, b) = range;
    if a == b {
        1.0 + a
    } else {
        1.0 + rng.random_range(a..b)
    }
}

const MAX_RANDOMIZATION_ATTEMPTS: usize = 16;

/// Perturb the nominal rigid-body parameters once for a new episode.
///
/// Inertia is scaled as `S M S` with `S = diag(sqrt(1 + u_i))`, so diagonal
/// entries scale by exactly `1 + u_i` and the matrix stays symmetric
/// positive definite.
pub fn randomize_params<R: Rng + ?Sized>(
    nominal: &RigidBodyParams,
    ranges: &RandomizationRanges,
    rng: &mut R,
) -> Result<RigidBodyParams> {
    for _ in 0..MAX_RANDOMIZATION_ATTEMPTS {
        let s = Vector6::from_fn(|_, _| draw(ranges.inertia, rng));
        let lin = Vector6::from_fn(|_, _| draw(ranges.linear_damping, rng));
        let quad = Vector6::from_fn(|_, _| draw(ranges.quadratic_damping, rng));
        let buoy = draw(ranges.buoyancy, rng);
        if s.iter().any(|v| *v <= 0.0) {
            continue;
        }
        let sq = Matrix6::from_diagonal(&s.map(f64::sqrt));
        let m = sq * nominal.mass_matrix() * sq;
        let m = 0.5 * (m + m.transpose());
        let candidate = RigidBodyParams::new(
            m,
            nominal.linear_damping.component_mul(&lin),
            nominal.quadratic_damping.component_mul(&quad),
            nominal.weight,
            nominal.buoyancy * buoy,
            nominal.center_of_buoyancy,
            nominal.fluid_density,
        );
        if let Ok(p) = candidate {
            return Ok(p);
        }
    }
    Err(Error::Randomization(MAX_RANDOMIZATION_ATTEMPTS))
}

/// Scale actuator effectiveness for a new episode.
pub fn randomize_plant<R: Rng + ?Sized>(
    plant: &mut ActuatorPlant,
    ranges: &RandomizationRanges,
    rng: &mut R,
) -> Result<f64> {
    let f = draw(ranges.actuator_effectiveness, rng);
    if f <= 0.0 {
        return Err(Error::Randomization(1));
    }
    plant.scale_effectiveness(f);
    Ok(f)
}
