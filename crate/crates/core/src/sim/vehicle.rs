use std::collections::VecDeque;

use serde::Serialize;

use super::params::DriverParams;
use crate::behaviors::BehaviorState;

/// What a vehicle does at the end of its current edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "edge", rename_all = "snake_case")]
pub enum NextStep {
    Edge(u32),
    /// Reached its last destination; leaves the world at the edge end.
    Arrive,
    /// Leaves the network through a gateway.
    Exit,
    /// Stops at the edge end and stays.
    Park,
    /// No admissible way on; waits at the stop line.
    Stranded,
}

#[derive(Debug, Clone, Serialize)]
pub struct Vehicle {
    pub id: u32,
    pub edge: u32,
    pub lane: u8,
    /// Distance from the edge start, m.
    pub s: f64,
    pub v: f64,
    pub params: DriverParams,
    /// Edges after the current one.
    pub plan: VecDeque<u32>,
    pub behavior: BehaviorState,
    pub next: Option<NextStep>,
    /// Granted entry onto `(edge, lane)`.
    pub claim: Option<(u32, u8)>,
    /// Its last claim was rejected.
    pub waiting: bool,
    /// Inside this vertex's crossroad container.
    pub in_node: Option<u32>,
    pub last_change_tick: Option<u64>,
    pub spawn_tick: u64,
}

impl Vehicle {
    pub fn desired_speed(&self, speed_limit: f64) -> f64 {
        self.params.speed_compliance * speed_limit
    }

    pub fn is_stranded(&self) -> bool {
        self.next == Some(NextStep::Stranded)
    }
}

/// A vehicle crossing a crossroad container toward `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeOccupant {
    pub id: u32,
    pub target: u32,
    pub ready_tick: u64,
}

/// A trip waiting at its origin for an insertion gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendingTrip {
    pub origin: u32,
    pub destination: u32,
    pub params: DriverParams,
    pub arrival_tick: u64,
}
