use serde::Serialize;

use super::graph::TopoGraph;
use super::TopologyError;
use crate::geom::polar_angle;

/// Half-edge `2e` runs along edge `e` from `from` to `to`; `2e + 1` is its
/// twin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dcel {
    pub origin: Vec<u32>,
    /// Polar angle in `[0, 2π)` of each half-edge's first segment.
    pub angle: Vec<f64>,
    pub next_left: Vec<u32>,
    pub prior_right: Vec<u32>,
    /// Outgoing half-edges per vertex, counterclockwise from east.
    pub rings: Vec<Vec<u32>>,
    /// Position of each half-edge in its origin's ring.
    pub ring_pos: Vec<u32>,
}

#[inline]
pub fn twin(h: u32) -> u32 {
    h ^ 1
}

#[inline]
pub fn edge_of(h: u32) -> u32 {
    h >> 1
}

impl Dcel {
    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn dest(&self, h: u32) -> u32 {
        self.origin[twin(h) as usize]
    }

    /// The outgoing half-edge after `g` counterclockwise around its origin.
    pub fn rotate_ccw(&self, g: u32) -> u32 {
        self.next_left[twin(g) as usize]
    }

    pub fn ring(&self, v: u32) -> &[u32] {
        &self.rings[v as usize]
    }
}

pub fn build_dcel(topo: &TopoGraph) -> Result<Dcel, TopologyError> {
    let n = topo.edges.len() * 2;
    let mut origin = vec![0u32; n];
    let mut angle = vec![0f64; n];
    for e in &topo.edges {
        let g = &e.geometry;
        let m = g.len();
        let (a, b) = (g[0], g[1]);
        let (c, d) = (g[m - 1], g[m - 2]);
        if a == b || c == d {
            return Err(TopologyError::ZeroLengthSegment {
                polyline: e.polyline,
                ordinal: if a == b { 1 } else { m as u32 - 1 },
            });
        }
        let h = 2 * e.id as usize;
        origin[h] = e.from;
        origin[h + 1] = e.to;
        angle[h] = polar_angle(b.x - a.x, b.y - a.y);
        angle[h + 1] = polar_angle(d.x - c.x, d.y - c.y);
    }

    let mut rings = vec![Vec::new(); topo.vertices.len()];
    for h in 0..n as u32 {
        rings[origin[h as usize] as usize].push(h);
    }
    for ring in &mut rings {
        // ties by edge id, then forward before backward
        ring.sort_by(|&p, &q| angle[p as usize].total_cmp(&angle[q as usize]).then(p.cmp(&q)));
    }
    let mut ring_pos = vec![0u32; n];
    for ring in &rings {
        for (k, &h) in ring.iter().enumerate() {
            ring_pos[h as usize] = k as u32;
        }
    }

    let mut next_left = vec![0u32; n];
    let mut prior_right = vec![0u32; n];
    for h in 0..n as u32 {
        let t = twin(h);
        let ring = &rings[origin[t as usize] as usize];
        let k = ring_pos[t as usize] as usize;
        next_left[h as usize] = ring[(k + 1) % ring.len()];
    }
    for g in 0..n as u32 {
        let ring = &rings[origin[g as usize] as usize];
        let k = ring_pos[g as usize] as usize;
        prior_right[g as usize] = twin(ring[(k + ring.len() - 1) % ring.len()]);
    }
    Ok(Dcel {
        origin,
        angle,
        next_left,
        prior_right,
        rings,
        ring_pos,
    })
}
