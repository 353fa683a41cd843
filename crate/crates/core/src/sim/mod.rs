//! The vehicle world: car following, lanes, crossroads, spawning, and the
//! deterministic two-phase tick that advances it.

mod commit;
mod idm;
mod lanes;
mod params;
mod perceive;
mod vehicle;
mod world;

pub use idm::{equilibrium_flow, equilibrium_gap, equilibrium_speed, idm_acceleration};
pub use lanes::{choose_lane_on_entry, classify_turn, turn_lane, Turn};
pub use params::{DriverDistributions, DriverParams, SimParams, TruncNormal};
pub use vehicle::{NextStep, NodeOccupant, PendingTrip, Vehicle};
pub use world::{Counters, Network, Placement, TickReport, World, WorldConfig};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown edge {0}")]
    UnknownEdge(u32),
}
