use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The three vehicle designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    /// Hovering AUV with four heave and four vectored thrusters.
    Hovering,
    /// Torpedo AUV with four rudders and one surge thruster.
    Torpedo,
    /// Turtle-like robot driven by four oscillating fins.
    Ucat,
}

const HOVERING_NAMES: [&str; 8] = ["T0", "T1", "T2", "T3", "T4", "T5", "T6", "T7"];
const TORPEDO_NAMES: [&str; 5] = ["R0", "R1", "R2", "R3", "P"];
const UCAT_NAMES: [&str; 4] = ["FL", "FR", "RL", "RR"];

impl Platform {
    pub const ALL: [Platform; 3] = [Platform::Hovering, Platform::Torpedo, Platform::Ucat];

    pub fn name(self) -> &'static str {
        match self {
            Platform::Hovering => "hovering",
            Platform::Torpedo => "torpedo",
            Platform::Ucat => "ucat",
        }
    }

    /// Canonical actuator names, in command order.
    pub fn actuator_names(self) -> &'static [&'static str] {
        match self {
            Platform::Hovering => &HOVERING_NAMES,
            Platform::Torpedo => &TORPEDO_NAMES,
            Platform::Ucat => &UCAT_NAMES,
        }
    }

    pub fn actuator_count(self) -> usize {
        self.actuator_names().len()
    }

    /// Policy action dimension: 8 thruster forces, 4 rudder angles plus
    /// thrust, or 4 fins x (amplitude, center, rate, phase).
    pub fn action_dim(self) -> usize {
        match self {
            Platform::Hovering => 8,
            Platform::Torpedo => 5,
            Platform::Ucat => 16,
        }
    }

    pub fn default_time_limit(self) -> f64 {
        match self {
            Platform::Hovering => 40.0,
            Platform::Torpedo => 100.0,
            Platform::Ucat => 75.0,
        }
    }

    pub fn default_action_period(self) -> f64 {
        match self {
            Platform::Ucat => 0.5,
            _ => 0.1,
        }
    }

    pub fn actuator_index(self, name: &str) -> Option<usize> {
        self.actuator_names()
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Platform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "hovering" => Ok(Platform::Hovering),
            "torpedo" => Ok(Platform::Torpedo),
            "ucat" | "u-cat" => Ok(Platform::Ucat),
            other => Err(Error::Config(format!(
                "unknown platform `{other}` (expected hovering, torpedo or ucat)"
            ))),
        }
    }
}
