//! Congestion sentinels attached to every edge and vertex. They judge
//! encumbrance from occupancy, annoyed drivers and neighbor warnings, and
//! drive local next-hop retables.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::{local_retable, NextHopTable, TrafficGraph, WeightOverlay, HUGE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransporterParams {
    pub occupancy_weight: f64,
    pub annoyed_weight: f64,
    pub base_threshold: f64,
    /// Threshold factor per neighbor warning.
    pub warning_decay: f64,
    /// An encumbered element clears below this share of its threshold.
    pub hysteresis: f64,
    /// Weight multiplier for encumbered edges.
    pub encumbered_multiplier: f64,
    /// Vertex retables per tick.
    pub retable_budget: usize,
}

impl Default for TransporterParams {
    fn default() -> Self {
        Self {
            occupancy_weight: 0.6,
            annoyed_weight: 0.4,
            base_threshold: 0.5,
            warning_decay: 0.85,
            hysteresis: 0.8,
            encumbered_multiplier: 50.0,
            retable_budget: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transporter {
    pub capacity: u32,
    pub count: u32,
    pub annoyed_fraction: f64,
    pub warning_level: u32,
    pub encumbered: bool,
    pub barred: bool,
    pub base_threshold: f64,
}

impl Transporter {
    pub fn new(capacity: u32, base_threshold: f64) -> Self {
        Self {
            capacity: capacity.max(1),
            count: 0,
            annoyed_fraction: 0.0,
            warning_level: 0,
            encumbered: false,
            barred: false,
            base_threshold,
        }
    }

    pub fn score(&self, p: &TransporterParams) -> f64 {
        p.occupancy_weight * (self.count as f64 / self.capacity as f64) + p.annoyed_weight * self.annoyed_fraction
    }

    pub fn threshold(&self, p: &TransporterParams) -> f64 {
        self.base_threshold * p.warning_decay.powi(self.warning_level as i32)
    }

    /// Encumbrance judgment with hysteresis around the effective threshold.
    pub fn estimate_encumbrance(&self, p: &TransporterParams) -> bool {
        let score = self.score(p);
        let thr = self.threshold(p);
        if self.encumbered {
            score >= p.hysteresis * thr
        } else {
            score >= thr
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Element {
    Edge(u32),
    Vertex(u32),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Edge(e) => write!(f, "e{e}"),
            Element::Vertex(v) => write!(f, "v{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldEvent {
    Encumber,
    Clear,
    Bar,
    Unbar,
    Retable,
}

impl FieldEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldEvent::Encumber => "encumber",
            FieldEvent::Clear => "clear",
            FieldEvent::Bar => "bar",
            FieldEvent::Unbar => "unbar",
            FieldEvent::Retable => "retable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncumbranceRecord {
    pub tick: u64,
    pub element: Element,
    pub event: FieldEvent,
}

#[derive(Debug, Error, PartialEq)]
pub enum TransporterError {
    #[error("unknown edge {0}")]
    UnknownEdge(u32),
}

/// Transporters of a whole network plus the retable queue they feed.
#[derive(Debug, Clone, Serialize)]
pub struct EncumbranceField {
    pub params: TransporterParams,
    pub edges: Vec<Transporter>,
    pub vertices: Vec<Transporter>,
    /// Edges sharing a vertex with each edge.
    neighbors: Vec<Vec<u32>>,
    /// Edges incident to each vertex.
    incident: Vec<Vec<u32>>,
    endpoints: Vec<(u32, u32)>,
    pub overlay: WeightOverlay,
    dirty: Vec<bool>,
    queue: VecDeque<u32>,
    pub log: Vec<EncumbranceRecord>,
}

impl EncumbranceField {
    pub fn new(g: &TrafficGraph, params: TransporterParams) -> Self {
        let incident: Vec<Vec<u32>> = g
            .vertices
            .iter()
            .map(|v| {
                let mut l: Vec<u32> = v.out_edges.iter().chain(v.in_edges.iter()).copied().collect();
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        let neighbors = g
            .edges
            .iter()
            .map(|e| {
                let mut l: Vec<u32> = incident[e.from as usize]
                    .iter()
                    .chain(incident[e.to as usize].iter())
                    .copied()
                    .filter(|&x| x != e.id)
                    .collect();
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        Self {
            params,
            edges: g.edges.iter().map(|e| Transporter::new(e.capacity, params.base_threshold)).collect(),
            vertices: g.vertices.iter().map(|v| Transporter::new(v.capacity, params.base_threshold)).collect(),
            neighbors,
            incident,
            endpoints: g.edges.iter().map(|e| (e.from, e.to)).collect(),
            overlay: WeightOverlay::default(),
            dirty: vec![false; g.vertices.len()],
            queue: VecDeque::new(),
            log: Vec::new(),
        }
    }

    pub fn set_counts(&mut self, edge_counts: &[(u32, u32)], vertex_counts: &[(u32, u32)]) {
        for (t, &(count, annoyed)) in self.edges.iter_mut().zip(edge_counts) {
            t.count = count;
            t.annoyed_fraction = if count > 0 { annoyed as f64 / count as f64 } else { 0.0 };
        }
        for (t, &(count, annoyed)) in self.vertices.iter_mut().zip(vertex_counts) {
            t.count = count;
            t.annoyed_fraction = if count > 0 { annoyed as f64 / count as f64 } else { 0.0 };
        }
    }

    pub fn encumbered_edges(&self) -> impl Iterator<Item = u32> + '_ {
        self.edges.iter().enumerate().filter(|(_, t)| t.encumbered).map(|(i, _)| i as u32)
    }

    pub fn is_barred(&self, e: u32) -> bool {
        self.edges[e as usize].barred
    }

    pub fn is_encumbered(&self, e: u32) -> bool {
        self.edges[e as usize].encumbered
    }

    /// Recompute flags, log changes and queue endpoint retables for edges
    /// whose flag moved.
    pub fn estimate(&mut self, tick: u64) {
        let p = self.params;
        for i in 0..self.edges.len() {
            let now = self.edges[i].estimate_encumbrance(&p);
            if now != self.edges[i].encumbered {
                self.edges[i].encumbered = now;
                let event = if now { FieldEvent::Encumber } else { FieldEvent::Clear };
                self.log.push(EncumbranceRecord {
                    tick,
                    element: Element::Edge(i as u32),
                    event,
                });
                self.refresh_overlay(i as u32);
                self.mark_endpoints(i as u32);
            }
        }
        for i in 0..self.vertices.len() {
            let now = self.vertices[i].estimate_encumbrance(&p);
            if now != self.vertices[i].encumbered {
                self.vertices[i].encumbered = now;
                let event = if now { FieldEvent::Encumber } else { FieldEvent::Clear };
                self.log.push(EncumbranceRecord {
                    tick,
                    element: Element::Vertex(i as u32),
                    event,
                });
            }
        }
    }

    /// One-hop warning counts from the current encumbered edge set.
    pub fn propagate_warnings(&mut self) {
        let enc: Vec<bool> = self.edges.iter().map(|t| t.encumbered).collect();
        for (i, n) in self.neighbors.iter().enumerate() {
            self.edges[i].warning_level = n.iter().filter(|&&x| enc[x as usize]).count() as u32;
        }
        for (v, inc) in self.incident.iter().enumerate() {
            self.vertices[v].warning_level = inc.iter().filter(|&&x| enc[x as usize]).count() as u32;
        }
    }

    fn refresh_overlay(&mut self, e: u32) {
        let t = &self.edges[e as usize];
        let m = if t.barred {
            HUGE
        } else if t.encumbered {
            self.params.encumbered_multiplier
        } else {
            1.0
        };
        self.overlay.set(e, m);
    }

    fn mark_endpoints(&mut self, e: u32) {
        let (a, b) = self.endpoints[e as usize];
        for v in [a, b] {
            if !self.dirty[v as usize] {
                self.dirty[v as usize] = true;
                self.queue.push_back(v);
            }
        }
    }

    pub fn bar(&mut self, e: u32, on: bool, tick: u64) -> Result<(), TransporterError> {
        let t = self.edges.get_mut(e as usize).ok_or(TransporterError::UnknownEdge(e))?;
        if t.barred == on {
            return Ok(());
        }
        t.barred = on;
        self.log.push(EncumbranceRecord {
            tick,
            element: Element::Edge(e),
            event: if on { FieldEvent::Bar } else { FieldEvent::Unbar },
        });
        self.refresh_overlay(e);
        self.mark_endpoints(e);
        Ok(())
    }

    pub fn pending_retables(&self) -> usize {
        self.queue.len()
    }

    /// Retable up to the budget of dirty vertices in FIFO order.
    pub fn retable_dirty(&mut self, g: &TrafficGraph, live: &mut NextHopTable, static_table: &NextHopTable, tick: u64) -> usize {
        let mut done = 0;
        while done < self.params.retable_budget {
            let Some(v) = self.queue.pop_front() else { break };
            self.dirty[v as usize] = false;
            if self.overlay.is_empty() {
                live.replace_row(v, static_table.row(v));
            } else {
                live.replace_row(v, &local_retable(g, v, &self.overlay).hops);
            }
            self.log.push(EncumbranceRecord {
                tick,
                element: Element::Vertex(v),
                event: FieldEvent::Retable,
            });
            done += 1;
        }
        done
    }
}
