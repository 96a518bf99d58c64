use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::Wrench;
use crate::error::{Error, Result};
use crate::faults::FaultMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThrusterGroup {
    Heave,
    Vectored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thruster {
    pub position: [f64; 3],
    pub direction: [f64; 3],
    pub max_force: f64,
    pub group: ThrusterGroup,
}

/// Eight fixed thrusters of the hovering vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrusterGeometry {
    pub thrusters: Vec<Thruster>,
    #[serde(skip)]
    pub(crate) command: [f64; 8],
}

impl ThrusterGeometry {
    pub fn new(thrusters: Vec<Thruster>) -> Result<Self> {
        let g = Self {
            thrusters,
            command: [0.0; 8],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thrusters.len() != 8 {
            return Err(Error::InvalidParams(format!(
                "hovering vehicle needs 8 thrusters, got {}",
                self.thrusters.len()
            )));
        }
        let heave = self
            .thrusters
            .iter()
            .filter(|t| t.group == ThrusterGroup::Heave)
            .count();
        if heave != 4 {
            return Err(Error::InvalidParams(format!(
                "expected 4 heave and 4 vectored thrusters, got {heave} heave"
            )));
        }
        for (i, t) in self.thrusters.iter().enumerate() {
            let n = Vector3::from(t.direction).norm();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParams(format!(
                    "thruster T{i} direction is not unit length ({n})"
                )));
            }
            if !(t.max_force > 0.0) {
                return Err(Error::InvalidParams(format!("thruster T{i} max_force must be positive")));
            }
        }
        Ok(())
    }
}

/// Net wrench of the thruster array. Commands are clipped to each thruster's
/// limit; faulty thrusters produce exactly nothing.
pub fn thruster_wrench(geom: &ThrusterGeometry, forces: &[f64], mask: &FaultMask) -> Wrench {
    geom.thrusters
        .iter()
        .zip(forces)
        .enumerate()
        .filter(|(i, _)| !mask.is_faulty(*i))
        .map(|(_, (t, &f))| {
            let f = f.clamp(-t.max_force, t.max_force);
            Wrench::from_force_at(Vector3::from(t.direction) * f, Vector3::from(t.position))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::Platform;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    fn geometry() -> ThrusterGeometry {
        presets::hovering_thrusters()
    }

    #[test]
    fn zero_command_zero_wrench() {
        let w = thruster_wrench(&geometry(), &[0.0; 8], &FaultMask::healthy(Platform::Hovering));
        assert_eq!(w, Wrench::zero());
    }

    #[test]
    fn single_heave_thruster_torque_by_hand() {
        let mut g = geometry();
        g.thrusters[4].position = [0.2, 0.2, 0.0];
        g.thrusters[4].direction = [0.0, 0.0, 1.0];
        let mut f = [0.0; 8];
        f[4] = 2.0;
        let w = thruster_wrench(&g, &f, &FaultMask::healthy(Platform::Hovering));
        // r x F = (0.2, 0.2, 0) x (0, 0, 2) = (0.2*2 - 0, 0 - 0.2*2, 0)
        assert_abs_diff_eq!(w.force, Vector3::new(0.0, 0.0, 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(w.torque, Vector3::new(0.4, -0.4, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn faulty_thruster_matches_zero_command() {
        let g = geometry();
        let mask = FaultMask::with_faults(Platform::Hovering, &[3]).unwrap();
        let mut cmd = [1.0, -2.0, 3.0, 5.0, 4.0, 0.5, 2.0, -1.0];
        let faulty = thruster_wrench(&g, &cmd, &mask);
        cmd[3] = 0.0;
        let zeroed = thruster_wrench(&g, &cmd, &FaultMask::healthy(Platform::Hovering));
        assert_eq!(faulty, zeroed);
    }

    #[test]
    fn commands_are_clipped() {
        let g = geometry();
        let max = g.thrusters[5].max_force;
        let mut a = [0.0; 8];
        a[5] = 10.0 * max;
        let mut b = [0.0; 8];
        b[5] = max;
        let healthy = FaultMask::healthy(Platform::Hovering);
        assert_eq!(thruster_wrench(&g, &a, &healthy), thruster_wrench(&g, &b, &healthy));
    }

    #[test]
    fn validation() {
        let mut g = geometry();
        g.thrusters[0].direction = [1.0, 1.0, 0.0];
        assert!(g.validate().is_err());
        let mut g = geometry();
        g.thrusters[0].group = ThrusterGroup::Heave;
        assert!(g.validate().is_err());
        let mut g = geometry();
        g.thrusters.pop();
        assert!(g.validate().is_err());
    }
}
