//! Default vehicle models.
//!
//! Values are tagged in [`provenance`] as `stated` (given outright for the
//! vehicle), `reference` (taken from published models of a similar vehicle)
//! or `chosen` (picked here so the vehicle is controllable; not ground truth).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::actuators::{
    ActuatorPlant, Fin, FinHydrodynamics, FinPlant, FinProfile, Rudder, RudderPlant, Thruster,
    ThrusterGeometry, ThrusterGroup,
};
use crate::dynamics::{RigidBodyParams, GRAVITY};
use crate::platform::Platform;

/// Rigid body plus actuators for one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformModel {
    pub body: RigidBodyParams,
    pub actuators: ActuatorPlant,
}

impl PlatformModel {
    pub fn default_for(platform: Platform) -> Self {
        Self {
            body: default_body(platform),
            actuators: default_plant(platform),
        }
    }

    pub fn platform(&self) -> Platform {
        self.actuators.platform()
    }
}

fn body(
    rigid: [f64; 6],
    added: [f64; 6],
    linear: [f64; 6],
    quadratic: [f64; 6],
    mass: f64,
    net_buoyancy: f64,
    cob_height: f64,
) -> RigidBodyParams {
    let diag = Vector6::from_fn(|i, _| rigid[i] + added[i]);
    let weight = mass * GRAVITY;
    RigidBodyParams::new(
        Matrix6::from_diagonal(&diag),
        Vector6::from(linear),
        Vector6::from(quadratic),
        weight,
        weight + net_buoyancy,
        Vector3::new(0.0, 0.0, cob_height),
        1000.0,
    )
    .expect("preset rigid-body parameters are valid")
}

pub fn default_body(platform: Platform) -> RigidBodyParams {
    match platform {
        // Heavy-configuration ROV class vehicle, slightly positive.
        Platform::Hovering => body(
            [13.5, 13.5, 13.5, 0.26, 0.23, 0.37],
            [6.36, 7.12, 18.68, 0.189, 0.135, 0.222],
            [13.7, 13.7, 33.0, 0.5, 0.8, 0.5],
            [141.0, 217.0, 190.0, 1.19, 0.47, 1.5],
            13.5,
            2.0,
            0.02,
        ),
        // 1.4 m, 30 kg torpedo, near-neutral.
        Platform::Torpedo => body(
            [30.0, 30.0, 30.0, 0.15, 4.9, 4.9],
            [1.5, 6.0, 6.0, 0.05, 2.0, 2.0],
            [5.0, 20.0, 20.0, 0.5, 5.0, 5.0],
            [20.0, 60.0, 60.0, 0.5, 10.0, 10.0],
            30.0,
            0.5,
            0.01,
        ),
        // Turtle-like robot, slightly negative.
        Platform::Ucat => body(
            [19.0, 19.0, 19.0, 0.3, 0.5, 0.6],
            [10.0, 15.0, 20.0, 0.1, 0.2, 0.2],
            [10.0, 15.0, 20.0, 0.5, 0.8, 0.8],
            [25.0, 40.0, 50.0, 0.5, 1.0, 1.0],
            19.0,
            -0.5,
            0.01,
        ),
    }
}

pub fn hovering_thrusters() -> ThrusterGeometry {
    let h = FRAC_1_SQRT_2;
    let vectored = |x: f64, y: f64, dy: f64| Thruster {
        position: [x, y, -0.085],
        direction: [h, dy, 0.0],
        max_force: 30.0,
        group: ThrusterGroup::Vectored,
    };
    let heave = |x: f64, y: f64| Thruster {
        position: [x, y, 0.0],
        direction: [0.0, 0.0, 1.0],
        max_force: 30.0,
        group: ThrusterGroup::Heave,
    };
    ThrusterGeometry::new(vec![
        vectored(0.156, -0.111, -h),
        vectored(0.156, 0.111, h),
        vectored(-0.156, -0.111, h),
        vectored(-0.156, 0.111, -h),
        heave(0.12, -0.218),
        heave(0.12, 0.218),
        heave(-0.12, -0.218),
        heave(-0.12, 0.218),
    ])
    .expect("preset thruster geometry is valid")
}

fn torpedo_rudders() -> RudderPlant {
    let rudder = |mount_angle: f64| {
        let span = 0.12;
        Rudder {
            mount_angle,
            position: [-0.65, span * mount_angle.cos(), span * mount_angle.sin()],
            area: 0.05,
            max_angle: 0.6,
            slew_rate: 3.0,
            angle: 0.0,
            target: 0.0,
        }
    };
    RudderPlant {
        rudders: vec![rudder(0.0), rudder(FRAC_PI_2), rudder(PI), rudder(1.5 * PI)],
        thruster_position: [-0.75, 0.0, 0.0],
        thruster_max_force: 30.0,
        wash_fraction: 0.0,
        propeller_area: 0.01,
        thrust_command: 0.0,
    }
}

fn ucat_fins() -> FinPlant {
    let fin = |x: f64, y: f64| Fin {
        mount: [x, y, 0.0],
        area: 0.015,
        lever: 0.08,
        slew_rate: 12.0,
        angle: 0.0,
        rate: 0.0,
        profile: FinProfile::hold(0.0),
        profile_start: 0.0,
    };
    FinPlant {
        fins: vec![fin(0.18, 0.15), fin(0.18, -0.15), fin(-0.18, 0.15), fin(-0.18, -0.15)],
        hydrodynamics: FinHydrodynamics {
            lift_coefficient: 1.0,
            drag_min: 0.1,
            drag_span: 0.9,
            feather_angle: 0.4,
            feather_speed: 0.2,
        },
        max_amplitude: 0.8,
        max_frequency: 6.0 * PI,
        initial_angle: 0.0,
    }
}

pub fn default_plant(platform: Platform) -> ActuatorPlant {
    match platform {
        Platform::Hovering => ActuatorPlant::Thrusters(hovering_thrusters()),
        Platform::Torpedo => ActuatorPlant::Rudders(torpedo_rudders()),
        Platform::Ucat => ActuatorPlant::Fins(ucat_fins()),
    }
}

/// Provenance of every default value group.
pub fn provenance(platform: Platform) -> Vec<(&'static str, &'static str)> {
    let mut v = vec![
        ("fluid_density", "chosen: fresh water"),
        ("integrator", "chosen: semi-implicit Euler, dt = 0.05 s"),
    ];
    match platform {
        Platform::Hovering => v.extend([
            ("thruster_count", "stated: 4 heave + 4 vectored at 45 degrees"),
            ("mass_inertia_added_mass", "reference: heavy ROV configuration"),
            ("quadratic_damping", "reference: heavy ROV configuration"),
            ("linear_damping", "reference, with small chosen roll/sway/yaw terms"),
            ("thruster_positions", "reference: heavy ROV frame layout"),
            ("thruster_max_force", "chosen: 30 N"),
            ("net_buoyancy", "chosen: +2 N"),
            ("cob_height", "chosen: 0.02 m"),
        ]),
        Platform::Torpedo => v.extend([
            ("rudder_count", "stated: 4 rudders at 90 degree intervals + 1 surge thruster"),
            ("rudder_coefficients", "stated: C_L, C_D polynomials"),
            ("hull_parameters", "chosen: 1.4 m, 30 kg"),
            ("rudder_area", "chosen: 0.05 m^2"),
            ("rudder_max_angle", "chosen: 0.6 rad"),
            ("wash_fraction", "chosen: 0 (surge flow only)"),
            ("net_buoyancy", "chosen: +0.5 N"),
        ]),
        Platform::Ucat => v.extend([
            ("fin_count", "stated: 4 fins, oscillation profile per fin"),
            ("fin_layout", "chosen: FL/FR/RL/RR at (+-0.18, +-0.15) m"),
            ("fin_hydrodynamics", "chosen: quasi-steady flat plate with feathering"),
            ("hull_parameters", "chosen: 19 kg"),
            ("net_buoyancy", "chosen: -0.5 N (slightly negative)"),
        ]),
    }
    v
}
