use serde::Serialize;

use super::index::{Classification, PointIndex};
use super::TopologyError;
use crate::geom::{polyline_length, PointXY};
use crate::ingest::RawNetwork;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopoVertex {
    pub id: u32,
    pub position: PointXY,
    pub z: i32,
    /// Point-index entry the vertex was made from.
    pub entry: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopoEdge {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    /// Full geometry, both end points included, in polyline order.
    pub geometry: Vec<PointXY>,
    pub length: f64,
    /// Source polyline; also the index of its attribute record.
    pub polyline: u32,
}

impl TopoEdge {
    pub fn shape_points(&self) -> &[PointXY] {
        &self.geometry[1..self.geometry.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopoGraph {
    pub vertices: Vec<TopoVertex>,
    pub edges: Vec<TopoEdge>,
    /// Vertex id per point-index entry, `None` for shape points.
    pub vertex_of_entry: Vec<Option<u32>>,
}

impl TopoGraph {
    pub fn degree(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.vertices.len()];
        for e in &self.edges {
            d[e.from as usize] += 1;
            d[e.to as usize] += 1;
        }
        d
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn shape_point_count(&self) -> usize {
        self.edges.iter().map(|e| e.geometry.len() - 2).sum()
    }
}

/// Split every polyline part at its vertices. Vertex ids follow entry order.
pub fn build_topo_graph(
    raw: &RawNetwork,
    index: &PointIndex,
    class: &Classification,
) -> Result<TopoGraph, TopologyError> {
    let mut vertex_of_entry = vec![None; index.entries.len()];
    let mut vertices = Vec::new();
    for (e, entry) in index.entries.iter().enumerate() {
        if class.is_vertex(e as u32) {
            let id = vertices.len() as u32;
            vertex_of_entry[e] = Some(id);
            vertices.push(TopoVertex {
                id,
                position: entry.position,
                z: entry.z,
                entry: e as u32,
            });
        }
    }

    let mut edges = Vec::new();
    for pl in &raw.polylines {
        let ids = &index.entry_of[pl.id as usize];
        for (part_no, range) in pl.parts.iter().enumerate() {
            for k in range.start + 1..range.end {
                if pl.points[k] == pl.points[k - 1] {
                    return Err(TopologyError::ZeroLengthSegment {
                        polyline: pl.id,
                        ordinal: k as u32,
                    });
                }
            }
            let dangling = TopologyError::DanglingGeometry {
                polyline: pl.id,
                part: part_no as u32,
            };
            let Some(mut from) = vertex_of_entry[ids[range.start] as usize] else {
                return Err(dangling);
            };
            if vertex_of_entry[ids[range.end - 1] as usize].is_none() {
                return Err(dangling);
            }
            let mut start = range.start;
            for k in range.start + 1..range.end {
                if let Some(to) = vertex_of_entry[ids[k] as usize] {
                    let geometry = pl.points[start..=k].to_vec();
                    let length = polyline_length(&geometry);
                    edges.push(TopoEdge {
                        id: edges.len() as u32,
                        from,
                        to,
                        geometry,
                        length,
                        polyline: pl.id,
                    });
                    from = to;
                    start = k;
                }
            }
        }
    }
    Ok(TopoGraph {
        vertices,
        edges,
        vertex_of_entry,
    })
}
