//! Constrained random actuator faults.
//!
//! Rules per platform:
//! - hovering: 1..=7 faulty thrusters, at least one heave thruster healthy;
//! - torpedo: 1..=3 faulty rudders, at least one pitch rudder healthy, the
//!   surge thruster never fails;
//! - U-CAT: 1..=3 faulty fins.
//!
//! Faults are drawn once per episode and never observed by the policy.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platform::Platform;

/// Hovering thrusters T4..T7 push along body z.
pub const HOVERING_HEAVE: [usize; 4] = [4, 5, 6, 7];
/// Torpedo rudders R0 and R2 are horizontal and act in pitch.
pub const TORPEDO_PITCH_RUDDERS: [usize; 2] = [0, 2];
pub const TORPEDO_THRUSTER: usize = 4;

/// Which actuators are broken for the current episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultMask {
    pub platform: Platform,
    pub faulty: Vec<bool>,
    /// Angle a broken fin or rudder is held at, rad. Unused for thrusters.
    pub frozen_angles: Vec<f64>,
}

/// Fault-count range and the rest of the sampling policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSampling {
    /// Smallest number of faults drawn. 0 admits healthy episodes.
    pub min_faults: usize,
    /// Largest number of faults; clamped to the platform limit.
    pub max_faults: usize,
}

impl FaultSampling {
    pub fn for_platform(platform: Platform) -> Self {
        Self {
            min_faults: 1,
            max_faults: max_faults(platform),
        }
    }
}

/// Largest fault count the platform rules allow.
pub fn max_faults(platform: Platform) -> usize {
    match platform {
        Platform::Hovering => 7,
        Platform::Torpedo | Platform::Ucat => 3,
    }
}

/// Actuators that may fail at all.
fn candidate_count(platform: Platform) -> usize {
    match platform {
        Platform::Hovering => 8,
        Platform::Torpedo => 4,
        Platform::Ucat => 4,
    }
}

impl FaultMask {
    pub fn healthy(platform: Platform) -> Self {
        let n = platform.actuator_count();
        Self {
            platform,
            faulty: vec![false; n],
            frozen_angles: vec![0.0; n],
        }
    }

    /// Mask with the given actuator indices broken.
    pub fn with_faults(platform: Platform, indices: &[usize]) -> Result<Self> {
        let mut mask = Self::healthy(platform);
        for &i in indices {
            if i >= mask.faulty.len() {
                return Err(Error::InvalidMask(format!(
                    "actuator index {i} out of range for {platform}"
                )));
            }
            mask.faulty[i] = true;
        }
        Ok(mask)
    }

    /// Parse a canonical name list such as `FR/RL` or `T0,T5`. `none` is healthy.
    pub fn parse(platform: Platform, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text.eq_ignore_ascii_case("none") {
            return Ok(Self::healthy(platform));
        }
        let mut indices = Vec::new();
        for part in text.split(['/', ',', '+', ' ']).filter(|s| !s.is_empty()) {
            let idx = platform.actuator_index(part).ok_or_else(|| {
                Error::InvalidMask(format!(
                    "unknown actuator `{part}` for {platform} (expected one of {})",
                    platform.actuator_names().join(", ")
                ))
            })?;
            indices.push(idx);
        }
        Self::with_faults(platform, &indices)
    }

    pub fn count(&self) -> usize {
        self.faulty.iter().filter(|&&f| f).count()
    }

    pub fn is_faulty(&self, i: usize) -> bool {
        self.faulty.get(i).copied().unwrap_or(false)
    }

    /// Canonical name, e.g. `FL/RR`, or `none`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self
            .faulty
            .iter()
            .zip(self.platform.actuator_names())
            .filter(|(f, _)| **f)
            .map(|(_, n)| *n)
            .collect();
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join("/")
        }
    }

    /// Whether the mask satisfies the platform fault rules. `min_faults`
    /// allows the healthy mask to pass when it is 0.
    pub fn satisfies_rules(&self, min_faults: usize) -> bool {
        if self.faulty.len() != self.platform.actuator_count() {
            return false;
        }
        let n = self.count();
        if n < min_faults || n > max_faults(self.platform) {
            return false;
        }
        match self.platform {
            Platform::Hovering => HOVERING_HEAVE.iter().any(|&i| !self.faulty[i]),
            Platform::Torpedo => {
                !self.faulty[TORPEDO_THRUSTER]
                    && TORPEDO_PITCH_RUDDERS.iter().any(|&i| !self.faulty[i])
            }
            Platform::Ucat => true,
        }
    }
}

impl fmt::Display for FaultMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Draw a fault mask: the count uniformly over its legal range, then a
/// uniform subset of that size satisfying the platform rules (rejection).
///
/// `frozen_angles` is filled with `initial_angle` for every actuator; the
/// environment overwrites it with the actual servo angles at reset.
pub fn sample_faults<R: Rng + ?Sized>(
    platform: Platform,
    sampling: &FaultSampling,
    initial_angle: f64,
    rng: &mut R,
) -> FaultMask {
    let max = sampling.max_faults.min(max_faults(platform));
    let min = sampling.min_faults.min(max);
    let count = rng.random_range(min..=max);
    let candidates = candidate_count(platform);
    loop {
        let chosen = rand::seq::index::sample(rng, candidates, count);
        let mut mask = FaultMask::healthy(platform);
        for i in chosen.iter() {
            mask.faulty[i] = true;
        }
        if mask.satisfies_rules(min) {
            mask.frozen_angles = vec![initial_angle; platform.actuator_count()];
            return mask;
        }
    }
}

/// Every U-CAT fin-fault combination of size 1..=3, ordered by size and then
/// lexicographically over FL, FR, RL, RR. There are 4 + 6 + 4 = 14.
pub fn enumerate_fault_set(platform: Platform) -> Result<Vec<FaultMask>> {
    if platform != Platform::Ucat {
        return Err(Error::UnsupportedPlatform {
            op: "enumerate_fault_set",
            platform: platform.to_string(),
        });
    }
    let n = platform.actuator_count();
    let mut out = Vec::new();
    for size in 1..=max_faults(platform) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(FaultMask::with_faults(platform, &combo)?);
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && combo[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Apply fault semantics to a physical command vector.
///
/// - hovering: broken thrusters output 0 N;
/// - torpedo: broken rudders target 0 rad (their initialization angle);
/// - U-CAT: broken fins get a zero-amplitude profile centered on their
///   frozen angle, so the servo target never moves.
pub fn apply_faults(command: &[f64], mask: &FaultMask) -> Result<Vec<f64>> {
    let platform = mask.platform;
    if command.len() != platform.action_dim() {
        return Err(Error::Dimension {
            what: "actuator command",
            expected: platform.action_dim(),
            got: command.len(),
        });
    }
    if mask.faulty.len() != platform.actuator_count() {
        return Err(Error::Dimension {
            what: "fault mask",
            expected: platform.actuator_count(),
            got: mask.faulty.len(),
        });
    }
    let mut out = command.to_vec();
    match platform {
        Platform::Hovering => {
            for (c, &f) in out.iter_mut().zip(&mask.faulty) {
                if f {
                    *c = 0.0;
                }
            }
        }
        Platform::Torpedo => {
            for i in 0..4 {
                if mask.faulty[i] {
                    out[i] = 0.0;
                }
            }
        }
        Platform::Ucat => {
            for i in 0..4 {
                if mask.faulty[i] {
                    let p = &mut out[4 * i..4 * i + 4];
                    p[0] = 0.0;
                    p[1] = mask.frozen_angles[i];
                    p[2] = 0.0;
                    p[3] = 0.0;
                }
            }
        }
    }
    Ok(out)
}
