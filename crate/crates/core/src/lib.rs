//! Fault-tolerant surfacing for underwater vehicles.
//!
//! A 6-DOF simulator for three vehicle designs (hovering thruster AUV,
//! torpedo AUV, fin-driven turtle robot), random actuator faults that the
//! controller never observes, a recurrent actor-critic trained with PPO, and
//! layer-wise weight transfer between platforms.

pub mod actuators;
pub mod dynamics;
pub mod error;
pub mod faults;
pub mod harness;
pub mod nn;
pub mod observation;
pub mod platform;
pub mod ppo;
pub mod presets;
pub mod task;

pub use error::{CheckpointError, Error, Result};
pub use platform::Platform;
