use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behaviors::Mode;
use crate::sim::{Network, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleView {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// rad, counterclockwise from east
    pub heading: f64,
    pub speed: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub id: u32,
    /// veh/km/lane
    pub density: f64,
    pub encumbered: bool,
    pub barred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventView {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub intensity: f64,
    pub start_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub in_network: usize,
    pub queued: usize,
    pub spawned: u64,
    pub arrived: u64,
    pub exited: u64,
    pub stranded: usize,
    pub encumbered_edges: usize,
    pub modes: BTreeMap<Mode, usize>,
}

/// One frame of the live stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub time_s: f64,
    pub paused: bool,
    /// Vehicles left out by subsampling.
    pub omitted: usize,
    pub vehicles: Vec<VehicleView>,
    pub edges: Vec<EdgeView>,
    pub events: Vec<EventView>,
    pub counts: Counts,
    /// World hash at this tick, as a hex string.
    pub hash: String,
}

impl Snapshot {
    /// Capture `w`; above `max_vehicles` every k-th vehicle in id order is kept.
    pub fn capture(w: &World, max_vehicles: usize, paused: bool) -> Self {
        let n = w.vehicle_count();
        let stride = if n > max_vehicles && max_vehicles > 0 { n.div_ceil(max_vehicles) } else { 1 };
        let vehicles: Vec<VehicleView> = w
            .vehicles()
            .step_by(stride)
            .map(|x| {
                let (p, heading) = w.pose(x);
                VehicleView {
                    id: x.id,
                    x: p.x,
                    y: p.y,
                    heading,
                    speed: x.v,
                    mode: x.behavior.mode,
                }
            })
            .collect();
        let f = w.field();
        let edges = (0..w.graph().edges.len() as u32)
            .map(|e| EdgeView {
                id: e,
                density: w.edge_density(e),
                encumbered: f.is_encumbered(e),
                barred: f.is_barred(e),
            })
            .collect();
        let events = w
            .event()
            .map(|ev| EventView {
                x: ev.position.x,
                y: ev.position.y,
                radius: ev.radius,
                intensity: ev.intensity,
                start_tick: ev.start_tick,
            })
            .into_iter()
            .collect();
        let mc = w.mode_counts();
        let c = w.counters();
        Self {
            tick: w.tick(),
            time_s: w.time(),
            paused,
            omitted: n - vehicles.len(),
            vehicles,
            edges,
            events,
            counts: Counts {
                in_network: n,
                queued: w.queued_trips(),
                spawned: c.spawned,
                arrived: c.arrived,
                exited: c.exited,
                stranded: w.stranded_count(),
                encumbered_edges: f.encumbered_edges().count(),
                modes: Mode::ALL.iter().map(|&m| (m, mc[m.index()])).collect(),
            },
            hash: format!("{:016x}", w.hash()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexView {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeShape {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    pub lanes: u8,
    pub geometry: Vec<[f64; 2]>,
}

/// Static geometry sent once per connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkView {
    pub vertices: Vec<VertexView>,
    pub edges: Vec<EdgeShape>,
}

impl NetworkView {
    pub fn of(net: &Network) -> Self {
        let g = &net.graph;
        Self {
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexView {
                    id: v.id,
                    x: v.position.x,
                    y: v.position.y,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeShape {
                    id: e.id,
                    from: e.from,
                    to: e.to,
                    lanes: e.lanes,
                    geometry: e.geometry.iter().map(|p| [p.x, p.y]).collect(),
                })
                .collect(),
        }
    }
}

/// Everything the server sends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Network(NetworkView),
    Snapshot(Box<Snapshot>),
    Ack {
        cmd_id: Option<serde_json::Value>,
        /// Tick before which the command took effect.
        tick: u64,
    },
    Error {
        cmd_id: Option<serde_json::Value>,
        msg: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }
}
