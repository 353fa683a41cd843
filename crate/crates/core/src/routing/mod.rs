//! The directed traffic graph and its precomputed next-hop tables.

mod graph;
mod tables;

pub use graph::{
    derive_traffic_graph, edge_capacity, edge_weight, node_capacity, GraphParams, TrafficEdge, TrafficGraph,
    TrafficVertex,
};
pub use tables::{
    build_next_hop_tables, check_degrees, dijkstra, local_retable, path_with_overlay, shortest_path, weights_csv,
    NextHopTable, SourceRow, WeightOverlay, ENCUMBERED, HOP_NONE, HOP_SELF, HUGE,
};

use thiserror::Error;

/// Largest out-degree a one-byte hop can address next to the two sentinels.
pub const MAX_OUT_DEGREE: usize = 254;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("network has no drivable edge")]
    NoDrivableEdges,
    #[error("topological edge {edge} has no attribute record")]
    MissingAttributes { edge: u32 },
    #[error("vertex {vertex} has out-degree {degree}, above 254")]
    DegreeOverflow { vertex: u32, degree: usize },
    #[error("vertex {to} is unreachable from {from}")]
    Unreachable { from: u32, to: u32 },
    #[error("next hops from {from} to {to} form a loop")]
    Loop { from: u32, to: u32 },
    #[error("bad table dump: {0}")]
    BadDump(&'static str),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointXY;

    /// Hand-made graph: vertices on a line, edges `(from, to, weight)`.
    pub(crate) fn graph(n: u32, edges: &[(u32, u32, f64)]) -> TrafficGraph {
        let mut vertices: Vec<TrafficVertex> = (0..n)
            .map(|id| TrafficVertex {
                id,
                position: PointXY::new(id as f64, 0.0),
                out_edges: vec![],
                in_edges: vec![],
                capacity: 1,
                span: 7.0,
            })
            .collect();
        let edges: Vec<TrafficEdge> = edges
            .iter()
            .enumerate()
            .map(|(i, &(from, to, weight))| TrafficEdge {
                id: i as u32,
                topo_edge: i as u32,
                forward: true,
                from,
                to,
                length: weight,
                lanes: 1,
                speed_limit: 1.0,
                weight,
                capacity: 1,
                geometry: vec![],
                in_rank: 0,
                out_rank: 0,
            })
            .collect();
        for e in &edges {
            vertices[e.from as usize].out_edges.push(e.id);
            vertices[e.to as usize].in_edges.push(e.id);
        }
        TrafficGraph {
            vertices,
            edges,
            params: GraphParams::default(),
        }
    }

    #[test]
    fn weight_formula() {
        let p = GraphParams::default();
        assert!((edge_weight(100.0, 13.9, 1, &p) - 7.993605115907274).abs() < 1e-12);
        assert!(edge_weight(100.0, 13.9, 2, &p) < edge_weight(100.0, 13.9, 1, &p));
        assert_eq!(edge_capacity(100.0, 2, &p), 26);
        assert_eq!(edge_capacity(3.0, 1, &p), 1);
    }

    #[test]
    fn triangle() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let t = build_next_hop_tables(&g).unwrap();
        assert_eq!(t.byte_size(), 9);
        assert_eq!(t.hop(0, 2), 0);
        assert_eq!(t.hop(0, 0), HOP_SELF);
        assert_eq!(shortest_path(&t, &g, 0, 2).unwrap(), vec![0, 1]);
        assert_eq!(shortest_path(&t, &g, 1, 1).unwrap(), Vec::<u32>::new());
        assert_eq!(shortest_path(&t, &g, 2, 0), Err(RoutingError::Unreachable { from: 2, to: 0 }));
    }

    #[test]
    fn dump_round_trip() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let t = build_next_hop_tables(&g).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(&bytes[..4], b"NHT1");
        assert_eq!(bytes.len(), 8 + 9);
        assert_eq!(NextHopTable::from_bytes(&bytes).unwrap(), t);
        assert!(NextHopTable::from_bytes(&bytes[..10]).is_err());
        assert!(weights_csv(&g).starts_with("edge_id,from,to,length,lanes,speed_limit,weight,capacity\n0,0,1,1,1,1,1,1\n"));
    }

    #[test]
    fn retable_detour_and_restore() {
        // 0 -> 1 -> 4 short; 0 -> 2 -> 3 -> 4 detour
        let g = graph(5, &[(0, 1, 1.0), (1, 4, 1.0), (0, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        let t = build_next_hop_tables(&g).unwrap();
        assert_eq!(t.hop(0, 4), 0);
        let mut o = WeightOverlay::default();
        o.set(0, HUGE);
        let row = local_retable(&g, 0, &o);
        assert_eq!(row.hops[4], 1);
        assert!(!row.avoid_impossible(4));
        assert!(row.avoid_impossible(1));
        o.set(0, 1.0);
        assert!(o.is_empty());
        assert_eq!(local_retable(&g, 0, &o).hops, t.row(0));
    }

    #[test]
    fn degree_overflow() {
        let edges: Vec<(u32, u32, f64)> = (1..=255).map(|k| (0, k, 1.0)).collect();
        let g = graph(256, &edges);
        assert_eq!(
            build_next_hop_tables(&g),
            Err(RoutingError::DegreeOverflow { vertex: 0, degree: 255 })
        );
    }
}
