use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::Serialize;

use super::graph::TrafficGraph;
use super::RoutingError;

/// Entry for `t == s`.
pub const HOP_SELF: u8 = 254;
/// Entry for unreachable destinations.
pub const HOP_NONE: u8 = 255;
/// Multiplier for barred edges.
pub const HUGE: f64 = 1e6;
/// Default multiplier for encumbered edges.
pub const ENCUMBERED: f64 = 50.0;

const DUMP_MAGIC: &[u8; 4] = b"NHT1";

/// One byte per (source, destination): the ordinal of the first out-edge of
/// a minimal-weight path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NextHopTable {
    n: usize,
    hops: Vec<u8>,
}

impl NextHopTable {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn byte_size(&self) -> usize {
        self.hops.len()
    }

    #[inline]
    pub fn hop(&self, s: u32, t: u32) -> u8 {
        self.hops[s as usize * self.n + t as usize]
    }

    pub fn row(&self, s: u32) -> &[u8] {
        &self.hops[s as usize * self.n..(s as usize + 1) * self.n]
    }

    pub fn replace_row(&mut self, s: u32, row: &[u8]) {
        assert_eq!(row.len(), self.n);
        self.hops[s as usize * self.n..(s as usize + 1) * self.n].copy_from_slice(row);
    }

    /// `NHT1`, little-endian `u32` vertex count, rows.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.hops.len());
        out.extend_from_slice(DUMP_MAGIC);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&self.hops);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RoutingError> {
        if bytes.len() < 8 || &bytes[..4] != DUMP_MAGIC {
            return Err(RoutingError::BadDump("missing NHT1 header"));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        if bytes.len() - 8 != n * n {
            return Err(RoutingError::BadDump("row bytes disagree with vertex count"));
        }
        Ok(Self {
            n,
            hops: bytes[8..].to_vec(),
        })
    }
}

/// Sparse per-edge weight multipliers; absent means 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightOverlay {
    pub multipliers: BTreeMap<u32, f64>,
}

impl WeightOverlay {
    pub fn get(&self, e: u32) -> f64 {
        self.multipliers.get(&e).copied().unwrap_or(1.0)
    }

    pub fn set(&mut self, e: u32, m: f64) {
        if m == 1.0 {
            self.multipliers.remove(&e);
        } else {
            self.multipliers.insert(e, m);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn is_barred(&self, e: u32) -> bool {
        self.get(e) >= HUGE
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (distance, vertex)
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source result: first-hop ordinals and costs under some weighting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceRow {
    pub hops: Vec<u8>,
    pub cost: Vec<f64>,
    /// Best path to the target crosses a barred edge.
    pub through_barred: Vec<bool>,
    /// Last edge of the best path, `u32::MAX` for the source and unreached.
    pub parent: Vec<u32>,
}

impl SourceRow {
    /// The only way to `t` is through a barred edge.
    pub fn avoid_impossible(&self, t: u32) -> bool {
        self.through_barred[t as usize]
    }
}

/// Dijkstra from `s`. The heap pops `(distance, vertex id)` in order; edges
/// are relaxed in out-ordinal order and a label only improves on a strictly
/// smaller distance, so ties keep the smallest ordinal found first.
pub fn dijkstra(g: &TrafficGraph, s: u32, overlay: Option<&WeightOverlay>) -> SourceRow {
    let n = g.vertex_count();
    let mut cost = vec![f64::INFINITY; n];
    let mut hops = vec![HOP_NONE; n];
    let mut barred = vec![false; n];
    let mut done = vec![false; n];
    let mut parent = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    cost[s as usize] = 0.0;
    hops[s as usize] = HOP_SELF;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u as usize] {
            continue;
        }
        done[u as usize] = true;
        for (k, &e) in g.vertices[u as usize].out_edges.iter().enumerate() {
            let edge = &g.edges[e as usize];
            let m = overlay.map_or(1.0, |o| o.get(e));
            let nd = d + edge.weight * m;
            let v = edge.to as usize;
            if nd < cost[v] {
                cost[v] = nd;
                hops[v] = if u == s { k as u8 } else { hops[u as usize] };
                barred[v] = barred[u as usize] || m >= HUGE;
                parent[v] = e;
                heap.push(Entry(nd, edge.to));
            }
        }
    }
    SourceRow {
        hops,
        cost,
        through_barred: barred,
        parent,
    }
}

pub fn build_next_hop_tables(g: &TrafficGraph) -> Result<NextHopTable, RoutingError> {
    check_degrees(g)?;
    let n = g.vertex_count();
    let rows: Vec<Vec<u8>> = (0..n as u32).into_par_iter().map(|s| dijkstra(g, s, None).hops).collect();
    Ok(NextHopTable {
        n,
        hops: rows.concat(),
    })
}

pub fn check_degrees(g: &TrafficGraph) -> Result<(), RoutingError> {
    for v in &g.vertices {
        if v.out_edges.len() > super::MAX_OUT_DEGREE {
            return Err(RoutingError::DegreeOverflow {
                vertex: v.id,
                degree: v.out_edges.len(),
            });
        }
    }
    Ok(())
}

/// Fresh row for `v` under `static weight × multiplier`.
pub fn local_retable(g: &TrafficGraph, v: u32, overlay: &WeightOverlay) -> SourceRow {
    dijkstra(g, v, Some(overlay))
}

/// Follow hops from `s` to `t`. Rows of different vintages can disagree, so
/// a walk longer than the vertex count is reported as a loop.
pub fn shortest_path(table: &NextHopTable, g: &TrafficGraph, s: u32, t: u32) -> Result<Vec<u32>, RoutingError> {
    let mut path = Vec::new();
    let mut at = s;
    while at != t {
        if path.len() >= g.vertex_count() {
            return Err(RoutingError::Loop { from: s, to: t });
        }
        let h = table.hop(at, t);
        if h == HOP_NONE || h == HOP_SELF {
            return Err(RoutingError::Unreachable { from: s, to: t });
        }
        let e = g.out_edge(at, h);
        path.push(e);
        at = g.edges[e as usize].to;
    }
    Ok(path)
}

/// Minimal-weight path under an overlay: `(edges, cost, through_barred)`.
pub fn path_with_overlay(
    g: &TrafficGraph,
    s: u32,
    t: u32,
    overlay: Option<&WeightOverlay>,
) -> Option<(Vec<u32>, f64, bool)> {
    let row = dijkstra(g, s, overlay);
    if !row.cost[t as usize].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut at = t;
    while at != s {
        let e = row.parent[at as usize];
        path.push(e);
        at = g.edges[e as usize].from;
    }
    path.reverse();
    Some((path, row.cost[t as usize], row.through_barred[t as usize]))
}

/// `edge_id,from,to,length,lanes,speed_limit,weight,capacity`
pub fn weights_csv(g: &TrafficGraph) -> String {
    use crate::fmt::g6;
    let mut s = String::from("edge_id,from,to,length,lanes,speed_limit,weight,capacity\n");
    for e in &g.edges {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.id,
            e.from,
            e.to,
            g6(e.length),
            e.lanes,
            g6(e.speed_limit),
            g6(e.weight),
            e.capacity
        ));
    }
    s
}
