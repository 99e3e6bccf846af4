//! 6-DOF air-to-air engagement simulator with an integrated
//! guidance-and-control policy trainer.
//!
//! The crate is organized around the simulation pipeline: [`aero`] builds
//! body-frame loads from flight condition and fin deflections, [`dynamics`]
//! integrates the rigid-body and target equations of motion, [`sensors`]
//! produces seeker/gyro/accelerometer measurements, [`actuation`] turns
//! policy actions into fin deflections, and [`engagement`] samples initial
//! conditions and maneuvers. [`env`] wires these into an episodic
//! environment at the 25 Hz navigation rate, [`ppo`] optimizes a recurrent
//! policy against it, and [`pn3dof`] provides a 3-DOF proportional
//! navigation benchmark over the same engagement ensemble.

pub mod actuation;
pub mod aero;
pub mod config;
pub mod dynamics;
pub mod engagement;
pub mod env;
pub mod error;
pub mod frames;
pub mod nn;
pub mod pn3dof;
pub mod ppo;
pub mod sensors;
pub mod stats;
pub mod traces;

pub use error::{GncError, Result};
