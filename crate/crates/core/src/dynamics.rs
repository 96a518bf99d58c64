//! Rigid-body equation of motion for a submerged vehicle.
//!
//! Frames: the world frame is z-up (depth is `-z`), the body frame is
//! x-forward, y-left, z-up. The body velocity vector is
//! `nu = [u, v, w, p, q, r]` and the attitude is stored as a unit quaternion
//! rotating body vectors into the world frame.
//!
//! The state is advanced with semi-implicit Euler: velocities are updated
//! from `M nu_dot = tau + g - C(nu) nu - D(nu) nu`, then the pose is
//! integrated with the updated velocities.

use nalgebra::{Cholesky, Matrix3, Matrix6, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Pose and body-frame velocities of a vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl BodyState {
    /// Vehicle at rest at `position`, upright.
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: UnitQuaternion::identity(),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }

    /// `nu = [u, v, w, p, q, r]`.
    pub fn nu(&self) -> Vector6<f64> {
        let (l, a) = (self.linear_velocity, self.angular_velocity);
        Vector6::new(l.x, l.y, l.z, a.x, a.y, a.z)
    }

    /// Depth below the surface, positive downward.
    pub fn depth(&self) -> f64 {
        -self.position.z
    }

    /// `(roll, pitch, yaw)` derived from the quaternion.
    pub fn euler_angles(&self) -> (f64, f64, f64) {
        self.orientation.euler_angles()
    }

    /// World-frame direction of the body z axis.
    pub fn body_z_in_world(&self) -> Vector3<f64> {
        self.orientation * Vector3::z()
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
            && self.linear_velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
    }
}

/// Body-frame force and torque.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    /// Wrench of `force` applied at body point `at`.
    pub fn from_force_at(force: Vector3<f64>, at: Vector3<f64>) -> Self {
        Self {
            force,
            torque: at.cross(&force),
        }
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.force.x,
            self.force.y,
            self.force.z,
            self.torque.x,
            self.torque.y,
            self.torque.z,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.as_vector().iter().all(|v| v.is_finite())
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

impl std::ops::AddAssign for Wrench {
    fn add_assign(&mut self, rhs: Wrench) {
        self.force += rhs.force;
        self.torque += rhs.torque;
    }
}

impl std::iter::Sum for Wrench {
    fn sum<I: Iterator<Item = Wrench>>(iter: I) -> Wrench {
        iter.fold(Wrench::zero(), |a, b| a + b)
    }
}

/// Plain-data form of [`RigidBodyParams`] used by the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodySpec {
    /// Rigid-body plus added-mass inertia, row-major 6x6.
    pub mass_matrix: [[f64; 6]; 6],
    pub linear_damping: [f64; 6],
    pub quadratic_damping: [f64; 6],
    /// Weight W, N.
    pub weight: f64,
    /// Buoyancy B, N.
    pub buoyancy: f64,
    /// Center of buoyancy relative to the center of gravity (body origin), m.
    pub center_of_buoyancy: [f64; 3],
    /// Fluid density, kg/m^3.
    pub fluid_density: f64,
}

/// Validated rigid-body parameters. The inverse inertia is cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RigidBodySpec", into = "RigidBodySpec")]
pub struct RigidBodyParams {
    mass_matrix: Matrix6<f64>,
    mass_inverse: Matrix6<f64>,
    pub linear_damping: Vector6<f64>,
    pub quadratic_damping: Vector6<f64>,
    pub weight: f64,
    pub buoyancy: f64,
    pub center_of_buoyancy: Vector3<f64>,
    pub fluid_density: f64,
}

impl RigidBodyParams {
    pub fn new(
        mass_matrix: Matrix6<f64>,
        linear_damping: Vector6<f64>,
        quadratic_damping: Vector6<f64>,
        weight: f64,
        buoyancy: f64,
        center_of_buoyancy: Vector3<f64>,
        fluid_density: f64,
    ) -> Result<Self> {
        let all_finite = mass_matrix.iter().all(|v| v.is_finite())
            && linear_damping.iter().all(|v| v.is_finite())
            && quadratic_damping.iter().all(|v| v.is_finite())
            && center_of_buoyancy.iter().all(|v| v.is_finite())
            && weight.is_finite()
            && buoyancy.is_finite()
            && fluid_density.is_finite();
        if !all_finite {
            return Err(Error::InvalidParams("non-finite rigid-body parameter".into()));
        }
        if (mass_matrix - mass_matrix.transpose()).amax() > 1e-9 * mass_matrix.amax().max(1.0) {
            return Err(Error::InvalidParams("mass matrix is not symmetric".into()));
        }
        let chol = Cholesky::new(mass_matrix)
            .ok_or_else(|| Error::InvalidParams("mass matrix is not positive definite".into()))?;
        if linear_damping.iter().chain(quadratic_damping.iter()).any(|&d| d < 0.0) {
            return Err(Error::InvalidParams("damping coefficients must be non-negative".into()));
        }
        if fluid_density <= 0.0 {
            return Err(Error::InvalidParams("fluid density must be positive".into()));
        }
        if weight < 0.0 || buoyancy < 0.0 {
            return Err(Error::InvalidParams("weight and buoyancy must be non-negative".into()));
        }
        Ok(Self {
            mass_matrix,
            mass_inverse: chol.inverse(),
            linear_damping,
            quadratic_damping,
            weight,
            buoyancy,
            center_of_buoyancy,
            fluid_density,
        })
    }

    /// Diagonal inertia with zero damping, neutral buoyancy and coincident centers.
    pub fn diagonal(inertia: [f64; 6], weight: f64) -> Result<Self> {
        Self::new(
            Matrix6::from_diagonal(&Vector6::from(inertia)),
            Vector6::zeros(),
            Vector6::zeros(),
            weight,
            weight,
            Vector3::zeros(),
            1000.0,
        )
    }

    pub fn mass_matrix(&self) -> &Matrix6<f64> {
        &self.mass_matrix
    }

    pub fn mass_inverse(&self) -> &Matrix6<f64> {
        &self.mass_inverse
    }

    /// Copy with a different inertia matrix; re-validates.
    pub fn with_mass_matrix(&self, mass_matrix: Matrix6<f64>) -> Result<Self> {
        Self::new(
            mass_matrix,
            self.linear_damping,
            self.quadratic_damping,
            self.weight,
            self.buoyancy,
            self.center_of_buoyancy,
            self.fluid_density,
        )
    }

    /// Re-run validation after fields were edited in place.
    pub fn revalidate(self) -> Result<Self> {
        self.with_mass_matrix(self.mass_matrix)
    }

    pub fn to_spec(&self) -> RigidBodySpec {
        let mut mass_matrix = [[0.0; 6]; 6];
        for (r, row) in mass_matrix.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.mass_matrix[(r, c)];
            }
        }
        RigidBodySpec {
            mass_matrix,
            linear_damping: self.linear_damping.into(),
            quadratic_damping: self.quadratic_damping.into(),
            weight: self.weight,
            buoyancy: self.buoyancy,
            center_of_buoyancy: self.center_of_buoyancy.into(),
            fluid_density: self.fluid_density,
        }
    }

    /// Kinetic energy `0.5 nu^T M nu`.
    pub fn kinetic_energy(&self, state: &BodyState) -> f64 {
        let nu = state.nu();
        0.5 * nu.dot(&(self.mass_matrix * nu))
    }
}

impl TryFrom<RigidBodySpec> for RigidBodyParams {
    type Error = Error;

    fn try_from(spec: RigidBodySpec) -> Result<Self> {
        let m = Matrix6::from_fn(|r, c| spec.mass_matrix[r][c]);
        Self::new(
            m,
            Vector6::from(spec.linear_damping),
            Vector6::from(spec.quadratic_damping),
            spec.weight,
            spec.buoyancy,
            Vector3::from(spec.center_of_buoyancy),
            spec.fluid_density,
        )
    }
}

impl From<RigidBodyParams> for RigidBodySpec {
    fn from(p: RigidBodyParams) -> Self {
        p.to_spec()
    }
}

/// Skew-symmetric matrix `S(a)` with `S(a) b = a x b`.
fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Coriolis-centripetal matrix built from the full inertia matrix.
///
/// With `M = [[M11, M12], [M21, M22]]` and `nu = [nu1; nu2]`:
/// `C = [[0, -S(M11 nu1 + M12 nu2)], [-S(M11 nu1 + M12 nu2), -S(M21 nu1 + M22 nu2)]]`.
/// The result is skew-symmetric, so `nu^T C(nu) nu = 0`.
pub fn coriolis_matrix(params: &RigidBodyParams, nu: &Vector6<f64>) -> Matrix6<f64> {
    let m = &params.mass_matrix;
    let nu1 = nu.fixed_rows::<3>(0).into_owned();
    let nu2 = nu.fixed_rows::<3>(3).into_owned();
    let m11 = m.fixed_view::<3, 3>(0, 0);
    let m12 = m.fixed_view::<3, 3>(0, 3);
    let m21 = m.fixed_view::<3, 3>(3, 0);
    let m22 = m.fixed_view::<3, 3>(3, 3);
    let a = m11 * nu1 + m12 * nu2;
    let b = m21 * nu1 + m22 * nu2;
    let sa = -skew(&a);
    let sb = -skew(&b);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&sa);
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&sa);
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&sb);
    c
}

/// Damping force `D(nu) nu` with `D = diag(linear) + diag(quadratic) |nu|`.
pub fn damping_force(params: &RigidBodyParams, nu: &Vector6<f64>) -> Vector6<f64> {
    Vector6::from_fn(|i, _| {
        (params.linear_damping[i] + params.quadratic_damping[i] * nu[i].abs()) * nu[i]
    })
}

/// Gravity and buoyancy acting on the body, expressed in the body frame.
///
/// Weight acts at the origin (center of gravity) along world `-z`, buoyancy
/// acts at the center of buoyancy along world `+z`.
pub fn restoring_wrench(params: &RigidBodyParams, orientation: &UnitQuaternion<f64>) -> Wrench {
    let up_body = orientation.inverse_transform_vector(&Vector3::z());
    let f_weight = -params.weight * up_body;
    let f_buoy = params.buoyancy * up_body;
    Wrench::new(
        f_weight + f_buoy,
        params.center_of_buoyancy.cross(&f_buoy),
    )
}

/// Body acceleration `nu_dot` under the applied wrench.
pub fn acceleration(state: &BodyState, params: &RigidBodyParams, tau: &Wrench) -> Vector6<f64> {
    let nu = state.nu();
    let c = coriolis_matrix(params, &nu);
    let rhs = tau.as_vector() + restoring_wrench(params, &state.orientation).as_vector()
        - c * nu
        - damping_force(params, &nu);
    params.mass_inverse * rhs
}

/// One semi-implicit Euler step of length `dt`.
pub fn dynamics_step(
    state: &BodyState,
    params: &RigidBodyParams,
    tau: &Wrench,
    dt: f64,
) -> BodyState {
    debug_assert!(dt > 0.0);
    let nu_dot = acceleration(state, params, tau);
    let nu = state.nu() + dt * nu_dot;
    let linear_velocity = Vector3::new(nu[0], nu[1], nu[2]);
    let angular_velocity = Vector3::new(nu[3], nu[4], nu[5]);

    let position = state.position + dt * (state.orientation * linear_velocity);
    let delta = UnitQuaternion::from_scaled_axis(angular_velocity * dt);
    let mut orientation = state.orientation * delta;
    orientation.renormalize();

    BodyState {
        position,
        orientation,
        linear_velocity,
        angular_velocity,
    }
}

/// Upward-positive world-frame vertical velocity.
pub fn world_vertical_velocity(state: &BodyState) -> f64 {
    (state.orientation * state.linear_velocity).z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn diag_params(m: f64) -> RigidBodyParams {
        RigidBodyParams::diagonal([m, m, m, m, m, m], 100.0).unwrap()
    }

    #[test]
    fn coriolis_pure_surge_has_no_effect() {
        let p = RigidBodyParams::diagonal([10.0, 12.0, 14.0, 1.0, 2.0, 3.0], 1.0).unwrap();
        let nu = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let f = coriolis_matrix(&p, &nu) * nu;
        assert_abs_diff_eq!(f.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coriolis_sway_term_matches_cross_product() {
        let m = 7.0;
        let (u, r) = (1.5, 0.4);
        let p = diag_params(m);
        let nu = Vector6::new(u, 0.0, 0.0, 0.0, 0.0, r);
        let f = coriolis_matrix(&p, &nu) * nu;
        // m * (nu2 x nu1), computed by hand
        let nu1 = Vector3::new(u, 0.0, 0.0);
        let nu2 = Vector3::new(0.0, 0.0, r);
        let expected = m * nu2.cross(&nu1);
        assert_abs_diff_eq!(f[1], expected.y, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], m * u * r, epsilon = 1e-12);
    }

    #[test]
    fn restoring_neutral_coincident_is_zero() {
        let p = diag_params(5.0);
        let q = UnitQuaternion::from_euler_angles(0.3, -0.7, 1.1);
        let w = restoring_wrench(&p, &q);
        assert_abs_diff_eq!(w.as_vector().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn restoring_heavy_vehicle_sinks() {
        let mut p = diag_params(5.0);
        p.weight = p.buoyancy + 1.0;
        let w = restoring_wrench(&p, &UnitQuaternion::identity());
        assert_abs_diff_eq!(w.force, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(w.torque.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn restoring_torque_opposes_roll() {
        let mut p = diag_params(5.0);
        p.center_of_buoyancy = Vector3::new(0.0, 0.0, 0.05);
        let roll = 0.1;
        let w = restoring_wrench(&p, &UnitQuaternion::from_euler_angles(roll, 0.0, 0.0));
        // r_b x (R^T B e_z) with R a rotation about x
        let f_b = Vector3::new(0.0, roll.sin() * p.buoyancy, roll.cos() * p.buoyancy);
        let expected = Vector3::new(0.0, 0.0, 0.05).cross(&f_b);
        assert_abs_diff_eq!(w.torque, expected, epsilon = 1e-12);
        assert!(w.torque.x < 0.0);
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = diag_params(3.0);
        let s = BodyState::at_rest(Vector3::new(1.0, 2.0, -5.0));
        let next = dynamics_step(&s, &p, &Wrench::zero(), 0.05);
        assert_abs_diff_eq!((next.position - s.position).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(next.nu().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_step_heave_force() {
        let p = RigidBodyParams::diagonal([4.0, 5.0, 6.0, 1.0, 1.0, 1.0], 10.0).unwrap();
        let s = BodyState::at_rest(Vector3::zeros());
        let (f, dt) = (3.0, 0.05);
        let tau = Wrench::new(Vector3::new(0.0, 0.0, f), Vector3::zeros());
        let next = dynamics_step(&s, &p, &tau, dt);
        assert_abs_diff_eq!(next.linear_velocity.z, dt * f / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn no_rotation_keeps_orientation() {
        let p = diag_params(3.0);
        let mut s = BodyState::at_rest(Vector3::zeros());
        s.orientation = UnitQuaternion::from_euler_angles(0.2, 0.1, -0.3);
        s.linear_velocity = Vector3::new(0.5, 0.0, 0.1);
        let q0 = s.orientation;
        for _ in 0..200 {
            s = dynamics_step(&s, &p, &Wrench::zero(), 0.05);
        }
        assert!(s.orientation.angle_to(&q0) < 1e-12);
    }

    #[test]
    fn vertical_velocity_frames() {
        let mut s = BodyState::at_rest(Vector3::zeros());
        s.linear_velocity = Vector3::new(0.0, 0.0, 1.0);
        assert_abs_diff_eq!(world_vertical_velocity(&s), 1.0, epsilon = 1e-15);

        s.orientation = UnitQuaternion::from_euler_angles(PI, 0.0, 0.0);
        assert_abs_diff_eq!(world_vertical_velocity(&s), -1.0, epsilon = 1e-12);

        // Positive pitch about body +y (left) points the nose down.
        s.orientation = UnitQuaternion::from_euler_angles(0.0, PI / 2.0, 0.0);
        s.linear_velocity = Vector3::new(1.0, 0.0, 0.0);
        let r = s.orientation.to_rotation_matrix();
        let oracle = (r.matrix() * Vector3::new(1.0, 0.0, 0.0)).z;
        assert_abs_diff_eq!(world_vertical_velocity(&s), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(world_vertical_velocity(&s), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        let mut m = Matrix6::identity();
        m[(0, 0)] = -1.0;
        assert!(RigidBodyParams::new(m, Vector6::zeros(), Vector6::zeros(), 1.0, 1.0, Vector3::zeros(), 1000.0).is_err());
        let mut m = Matrix6::identity();
        m[(0, 1)] = 0.5;
        assert!(RigidBodyParams::new(m, Vector6::zeros(), Vector6::zeros(), 1.0, 1.0, Vector3::zeros(), 1000.0).is_err());
        let d = Vector6::from_element(-0.1);
        assert!(RigidBodyParams::new(Matrix6::identity(), d, Vector6::zeros(), 1.0, 1.0, Vector3::zeros(), 1000.0).is_err());
        assert!(RigidBodyParams::new(Matrix6::identity(), Vector6::zeros(), Vector6::zeros(), 1.0, 1.0, Vector3::zeros(), 0.0).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let p = diag_params(2.0);
        let back = RigidBodyParams::try_from(p.to_spec()).unwrap();
        assert_eq!(p, back);
    }
}
