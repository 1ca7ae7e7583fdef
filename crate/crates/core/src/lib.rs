//! Deterministic 2D robot navigation simulator with a hybrid
//! (policy + social force) planner and anticipative collision avoidance.

pub mod anticipation;
pub mod config;
pub mod episodes;
pub mod error;
pub mod geometry;
pub mod hybrid;
pub mod policy;
pub mod sensing;
pub mod sfm;
pub mod world;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use world::{Body, Pose, WorldMap};
