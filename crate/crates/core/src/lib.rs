//! Deterministic 2D exploration simulator and evaluation harness.
//!
//! Worlds are grid floorplans. An agent with a planar depth sensor and noisy
//! odometry builds an occupancy map while a policy picks discrete actions.
//! The [`eval`] module measures map coverage and downstream navigation.

pub mod cli;
pub mod eval;
pub mod geom;
pub mod kinematics;
pub mod mapping;
pub mod planner;
pub mod policies;
pub mod raycast;
pub mod rewards;
pub mod seed;
pub mod sensor;
pub mod world;
