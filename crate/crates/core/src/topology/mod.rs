//! From raw polylines to a topological graph: coincident points are merged
//! through a quadtree, classified as vertices or shape points, split into
//! edges, and ordered around each vertex in a half-edge structure.

mod dcel;
mod export;
mod graph;
mod index;
mod quadtree;

pub use dcel::{build_dcel, edge_of, twin, Dcel};
pub use export::{edge_census_csv, to_graphviz, vertex_census_csv};
pub use graph::{build_topo_graph, TopoEdge, TopoGraph, TopoVertex};
pub use index::{
    build_point_index, classify_entry, classify_points, coincident, Classification, Incidence, IndexEntry,
    PointClass, PointIndex,
};
pub use quadtree::QuadTree;

use thiserror::Error;

use crate::ingest::RawNetwork;

pub const DEFAULT_EPS: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("polyline {polyline} part {part} does not end at a vertex")]
    DanglingGeometry { polyline: u32, part: u32 },
    #[error("polyline {polyline} repeats point {ordinal}")]
    ZeroLengthSegment { polyline: u32, ordinal: u32 },
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub index: PointIndex,
    pub class: Classification,
    pub graph: TopoGraph,
    pub dcel: Dcel,
}

pub fn build_topology(raw: &RawNetwork, eps: f64) -> Result<Topology, TopologyError> {
    let index = build_point_index(raw, eps);
    let class = classify_points(&index);
    let graph = build_topo_graph(raw, &index, &class)?;
    let dcel = build_dcel(&graph)?;
    Ok(Topology {
        index,
        class,
        graph,
        dcel,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geom::PointXY;
    use crate::ingest::{Direction, Polyline, RoadAttributes, ZLevelTable};

    fn raw(lines: &[&[(f64, f64)]], z: ZLevelTable) -> RawNetwork {
        let pls: Vec<Polyline> = lines
            .iter()
            .enumerate()
            .map(|(i, pts)| Polyline::single(i as u32, pts.iter().map(|&(x, y)| PointXY::new(x, y)).collect()))
            .collect();
        let attrs = (0..pls.len() as u32)
            .map(|ordinal| RoadAttributes {
                ordinal,
                lanes_forward: 1,
                lanes_backward: 1,
                speed_limit: 10.0,
                direction: Direction::Both,
            })
            .collect();
        RawNetwork::new(pls, attrs, z)
    }

    #[test]
    fn single_polyline() {
        let t = build_topology(&raw(&[&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]], ZLevelTable::default()), DEFAULT_EPS)
            .unwrap();
        assert_eq!(t.graph.vertices.len(), 2);
        assert_eq!(t.graph.edges.len(), 1);
        assert_eq!(t.graph.shape_point_count(), 1);
        assert_eq!(t.graph.edges[0].length, 10.0);
    }

    fn cross(z: ZLevelTable) -> Topology {
        build_topology(
            &raw(
                &[&[(-10.0, 0.0), (0.0, 0.0), (10.0, 0.0)], &[(0.0, -10.0), (0.0, 0.0), (0.0, 10.0)]],
                z,
            ),
            DEFAULT_EPS,
        )
        .unwrap()
    }

    #[test]
    fn x_crossing() {
        let t = cross(ZLevelTable::default());
        assert_eq!(t.graph.vertices.len(), 5);
        assert_eq!(t.graph.edges.len(), 4);
        let mut z = ZLevelTable::default();
        z.set(1, 1, 1);
        let t = cross(z);
        assert_eq!(t.graph.vertices.len(), 4);
        assert_eq!(t.graph.edges.len(), 2);
    }

    #[test]
    fn cross_ring_order() {
        let t = cross(ZLevelTable::default());
        let center = t.graph.vertex_of_entry[t.index.entry_of[0][1] as usize].unwrap();
        let ring = t.dcel.ring(center);
        assert_eq!(ring.len(), 4);
        let angles: Vec<f64> = ring.iter().map(|&h| t.dcel.angle[h as usize]).collect();
        for (a, want) in angles.iter().zip([0.0, PI / 2.0, PI, 1.5 * PI]) {
            assert!((a - want).abs() < 1e-12);
        }
        // incoming from the south: twin points south, next counterclockwise is east
        let from_south = ring.iter().map(|&h| twin(h)).find(|&h| t.dcel.angle[twin(h) as usize] > PI).unwrap();
        let east = t.dcel.next_left[from_south as usize];
        assert!(t.dcel.angle[east as usize].abs() < 1e-12);
        let mut h = from_south;
        for _ in 0..4 {
            h = twin(t.dcel.next_left[h as usize]);
        }
        assert_eq!(h, from_south);
    }

    #[test]
    fn dead_end_u_turn() {
        let t = build_topology(&raw(&[&[(0.0, 0.0), (10.0, 0.0)]], ZLevelTable::default()), DEFAULT_EPS).unwrap();
        assert_eq!(t.dcel.next_left[0], 1);
        assert_eq!(t.dcel.next_left[1], 0);
    }

    #[test]
    fn repeated_point_rejected() {
        let r = raw(&[&[(0.0, 0.0), (5.0, 0.0), (5.0, 0.0), (10.0, 0.0)]], ZLevelTable::default());
        assert!(matches!(
            build_topology(&r, DEFAULT_EPS),
            Err(TopologyError::ZeroLengthSegment { polyline: 0, .. })
        ));
    }

    #[test]
    fn census_exports() {
        let t = cross(ZLevelTable::default());
        let v = vertex_census_csv(&t.graph);
        assert_eq!(v.lines().count(), 6);
        assert!(v.lines().any(|l| l == "1,0,0,0,4"));
        let e = edge_census_csv(&t.graph);
        assert_eq!(e.lines().nth(1).unwrap(), "0,0,1,10,0");
        assert!(to_graphviz(&t.graph).contains("v0 -> v1"));
    }
}
