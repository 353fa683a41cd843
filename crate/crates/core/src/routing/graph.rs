use serde::{Deserialize, Serialize};

use super::RoutingError;
use crate::geom::PointXY;
use crate::ingest::{Direction, RoadAttributes};
use crate::topology::{edge_of, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphParams {
    /// Share of the limit a driver reasonably sustains.
    pub speed_factor: f64,
    /// Weight bonus per lane beyond the first.
    pub lane_bonus: f64,
    /// Road length one stopped vehicle takes, meters.
    pub slot_length: f64,
    /// Crossroad container slots per incident lane.
    pub node_slots_per_lane: f64,
    /// Width of one lane, meters; sizes crossroads.
    pub lane_width: f64,
    /// Speed through a crossroad, m/s.
    pub node_speed: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            speed_factor: 0.9,
            lane_bonus: 0.25,
            slot_length: 7.5,
            node_slots_per_lane: 0.5,
            lane_width: 3.5,
            node_speed: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficEdge {
    pub id: u32,
    pub topo_edge: u32,
    /// Travels along the polyline's point order.
    pub forward: bool,
    pub from: u32,
    pub to: u32,
    pub length: f64,
    pub lanes: u8,
    pub speed_limit: f64,
    pub weight: f64,
    pub capacity: u32,
    /// Geometry oriented in travel direction.
    pub geometry: Vec<PointXY>,
    /// Position of this edge in `to`'s incoming list.
    pub in_rank: u32,
    /// Position of this edge in `from`'s outgoing list.
    pub out_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficVertex {
    pub id: u32,
    pub position: PointXY,
    /// Counterclockwise from east; next-hop entries index this list.
    pub out_edges: Vec<u32>,
    /// Ordered by the polar angle of the road they arrive on.
    pub in_edges: Vec<u32>,
    pub capacity: u32,
    /// Crossing distance through the crossroad, meters.
    pub span: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficGraph {
    pub vertices: Vec<TrafficVertex>,
    pub edges: Vec<TrafficEdge>,
    pub params: GraphParams,
}

/// Travel-time-like attractiveness of an edge, seconds.
pub fn edge_weight(length: f64, speed_limit: f64, lanes: u8, p: &GraphParams) -> f64 {
    let lane_factor = 1.0 + p.lane_bonus * (lanes as f64 - 1.0);
    length / (p.speed_factor * speed_limit * lane_factor)
}

pub fn edge_capacity(length: f64, lanes: u8, p: &GraphParams) -> u32 {
    ((lanes as f64 * length / p.slot_length).floor() as u32).max(1)
}

/// Crossroad container size for the given total of incident lanes.
pub fn node_capacity(incident_lanes: u32, p: &GraphParams) -> u32 {
    ((incident_lanes as f64 * p.node_slots_per_lane).ceil() as u32).max(1)
}

impl TrafficGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.vertices[v as usize].out_edges.len()
    }

    /// Traffic edge leaving `v` at `ordinal`.
    pub fn out_edge(&self, v: u32, ordinal: u8) -> u32 {
        self.vertices[v as usize].out_edges[ordinal as usize]
    }

    pub fn find_edge(&self, from: u32, to: u32) -> Option<u32> {
        self.vertices[from as usize]
            .out_edges
            .iter()
            .copied()
            .find(|&e| self.edges[e as usize].to == to)
    }

    /// Seconds spent crossing a vertex's crossroad.
    pub fn traversal_delay(&self, v: u32) -> f64 {
        self.vertices[v as usize].span / self.params.node_speed
    }

    pub fn positions(&self) -> Vec<PointXY> {
        self.vertices.iter().map(|v| v.position).collect()
    }
}

/// Expand each topological edge into one traffic edge per allowed direction
/// (forward first), in topological edge order.
pub fn derive_traffic_graph(
    topo: &Topology,
    attrs: &[RoadAttributes],
    params: &GraphParams,
) -> Result<TrafficGraph, RoutingError> {
    let g = &topo.graph;
    let mut edges: Vec<TrafficEdge> = Vec::new();
    // traffic edge per half-edge
    let mut of_half = vec![None; g.edges.len() * 2];
    for te in &g.edges {
        let a = attrs
            .get(te.polyline as usize)
            .ok_or(RoutingError::MissingAttributes { edge: te.id })?;
        let dirs: &[bool] = match a.direction {
            Direction::Forward => &[true],
            Direction::Backward => &[false],
            Direction::Both => &[true, false],
        };
        for &fwd in dirs {
            let lanes = if fwd { a.lanes_forward } else { a.lanes_backward };
            let (from, to, geometry) = if fwd {
                (te.from, te.to, te.geometry.clone())
            } else {
                (te.to, te.from, te.geometry.iter().rev().copied().collect())
            };
            let id = edges.len() as u32;
            of_half[2 * te.id as usize + usize::from(!fwd)] = Some(id);
            edges.push(TrafficEdge {
                id,
                topo_edge: te.id,
                forward: fwd,
                from,
                to,
                length: te.length,
                lanes,
                speed_limit: a.speed_limit,
                weight: edge_weight(te.length, a.speed_limit, lanes, params),
                capacity: edge_capacity(te.length, lanes, params),
                geometry,
                in_rank: 0,
                out_rank: 0,
            });
        }
    }
    if edges.is_empty() {
        return Err(RoutingError::NoDrivableEdges);
    }

    let mut vertices = Vec::with_capacity(g.vertices.len());
    for v in &g.vertices {
        let ring = topo.dcel.ring(v.id);
        let out_edges: Vec<u32> = ring.iter().filter_map(|&h| of_half[h as usize]).collect();
        let in_edges: Vec<u32> = ring.iter().filter_map(|&h| of_half[(h ^ 1) as usize]).collect();
        if out_edges.len() > super::MAX_OUT_DEGREE {
            return Err(RoutingError::DegreeOverflow {
                vertex: v.id,
                degree: out_edges.len(),
            });
        }
        let mut lanes_sum = 0u32;
        let mut lanes_max = 0u8;
        for &h in ring {
            let te = edge_of(h) as usize;
            let a = &attrs[g.edges[te].polyline as usize];
            for (lanes, allowed) in [
                (a.lanes_forward, matches!(a.direction, Direction::Forward | Direction::Both)),
                (a.lanes_backward, matches!(a.direction, Direction::Backward | Direction::Both)),
            ] {
                if allowed {
                    lanes_sum += lanes as u32;
                    lanes_max = lanes_max.max(lanes);
                }
            }
        }
        vertices.push(TrafficVertex {
            id: v.id,
            position: v.position,
            out_edges,
            in_edges,
            capacity: node_capacity(lanes_sum, params),
            span: params.lane_width * lanes_max.max(1) as f64 * 2.0,
        });
    }
    for v in &vertices {
        for (k, &e) in v.out_edges.iter().enumerate() {
            edges[e as usize].out_rank = k as u32;
        }
        for (k, &e) in v.in_edges.iter().enumerate() {
            edges[e as usize].in_rank = k as u32;
        }
    }
    Ok(TrafficGraph {
        vertices,
        edges,
        params: *params,
    })
}
