use std::fmt::Write;

use super::graph::TopoGraph;
use crate::fmt::g6;

/// GraphViz text dump with vertices pinned to their coordinates.
pub fn to_graphviz(topo: &TopoGraph) -> String {
    let mut s = String::from("digraph topo {\n  node [shape=point];\n");
    for v in &topo.vertices {
        let _ = writeln!(s, "  v{} [pos=\"{},{}!\"];", v.id, g6(v.position.x), g6(v.position.y));
    }
    for e in &topo.edges {
        let _ = writeln!(s, "  v{} -> v{} [label=\"e{} {}m\"];", e.from, e.to, e.id, g6(e.length));
    }
    s.push_str("}\n");
    s
}

/// `id,x,y,z,degree`
pub fn vertex_census_csv(topo: &TopoGraph) -> String {
    let deg = topo.degree();
    let mut s = String::from("id,x,y,z,degree\n");
    for v in &topo.vertices {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            v.id,
            g6(v.position.x),
            g6(v.position.y),
            v.z,
            deg[v.id as usize]
        );
    }
    s
}

/// `id,from,to,length,shape_points`
pub fn edge_census_csv(topo: &TopoGraph) -> String {
    let mut s = String::from("id,from,to,length,shape_points\n");
    for e in &topo.edges {
        let _ = writeln!(s, "{},{},{},{},{}", e.id, e.from, e.to, g6(e.length), e.geometry.len() - 2);
    }
    s
}
