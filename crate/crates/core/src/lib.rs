//! Frenet-frame lattice planning stack for multi-lane highway driving, with a
//! deterministic traffic simulator and batch evaluation harness.

pub mod batch;
pub mod behavior;
pub mod constraints;
pub mod control;
pub mod cost;
pub mod episode;
pub mod geometry;
pub mod lattice;
pub mod log;
pub mod metrics;
pub mod planner;
pub mod polynomial;
pub mod road;
pub mod scenario;
pub mod supervisor;
pub mod vehicle;
pub mod world;

pub use episode::{run_episode, EpisodeError};
pub use geometry::{FrenetState, ReferencePath, Waypoint3};
pub use log::EpisodeLog;
pub use road::LaneLayout;
pub use scenario::{DriverProfile, Scenario};
