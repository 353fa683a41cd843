#![allow(dead_code)]

pub mod oracle;
pub mod ws;

use std::sync::Arc;

use urbsim::behaviors::{Mode, OdPreset, OdScenario};
use urbsim::geom::PointXY;
use urbsim::ingest::{generate_synthetic, Direction, Polyline, RawNetwork, RoadAttributes, SyntheticSpec, ZLevelTable};
use urbsim::routing::GraphParams;
use urbsim::scenario::build_network;
use urbsim::sim::{DriverParams, Network, Placement, World};

pub fn network(raw: &RawNetwork) -> Arc<Network> {
    Arc::new(build_network(raw, 0.01, &GraphParams::default()).expect("fixture builds"))
}

pub fn ring(segments: u32, circumference: f64) -> Arc<Network> {
    network(&generate_synthetic(&SyntheticSpec::ring(segments, circumference), 1).unwrap())
}

pub fn grid(rows: u32, cols: u32, block: f64, lanes: u8) -> Arc<Network> {
    network(&generate_synthetic(&SyntheticSpec::grid(rows, cols, block).with_lanes(lanes), 1).unwrap())
}

/// One-way roads given as `(points, lanes, speed)`.
pub fn one_way(roads: &[(&[(f64, f64)], u8, f64)]) -> RawNetwork {
    let mut pls = Vec::new();
    let mut attrs = Vec::new();
    for (i, (pts, lanes, speed)) in roads.iter().enumerate() {
        pls.push(Polyline::single(i as u32, pts.iter().map(|&(x, y)| PointXY::new(x, y)).collect()));
        attrs.push(RoadAttributes {
            ordinal: i as u32,
            lanes_forward: *lanes,
            lanes_backward: 0,
            speed_limit: *speed,
            direction: Direction::Forward,
        });
    }
    RawNetwork::new(pls, attrs, ZLevelTable::default())
}

pub struct TwoRoute {
    pub net: Arc<Network>,
    pub origin: u32,
    /// Source of the cross stream merging into the short route.
    pub cross_origin: u32,
    pub destination: u32,
    /// First edge of the short route.
    pub short: u32,
    /// Shared edge after the merge.
    pub merged: u32,
    /// First edge of the long route.
    pub long: u32,
}

/// From S two one-way routes reach D: a short one whose second half is
/// shared with a stream from C, and a 1100 m detour.
pub fn two_route() -> TwoRoute {
    let raw = one_way(&[
        (&[(0.0, 0.0), (300.0, 0.0)], 1, 13.9),
        (&[(300.0, 0.0), (600.0, 0.0)], 1, 13.9),
        (&[(300.0, 300.0), (300.0, 0.0)], 1, 13.9),
        (&[(0.0, 0.0), (0.0, -250.0)], 1, 13.9),
        (&[(0.0, -250.0), (600.0, -250.0)], 1, 13.9),
        (&[(600.0, -250.0), (600.0, 0.0)], 1, 13.9),
    ]);
    let net = network(&raw);
    let g = &net.graph;
    let at = |x: f64, y: f64| {
        g.vertices
            .iter()
            .find(|v| v.position.dist(&PointXY::new(x, y)) < 1e-6)
            .map(|v| v.id)
            .unwrap()
    };
    let (s, x, d, p, c) = (at(0.0, 0.0), at(300.0, 0.0), at(600.0, 0.0), at(0.0, -250.0), at(300.0, 300.0));
    TwoRoute {
        origin: s,
        cross_origin: c,
        destination: d,
        short: g.find_edge(s, x).unwrap(),
        merged: g.find_edge(x, d).unwrap(),
        long: g.find_edge(s, p).unwrap(),
        net,
    }
}

/// Trips from S and C to D at `from_s` and `from_c` veh/s.
pub fn two_route_od(f: &TwoRoute, from_s: f64, from_c: f64) -> (OdScenario, f64) {
    let od = OdScenario {
        source_vertices: Some(vec![(f.origin, from_s), (f.cross_origin, from_c)]),
        sink_vertices: Some(vec![(f.destination, 1.0)]),
        ..OdScenario::preset(OdPreset::Custom)
    };
    (od, from_s + from_c)
}

/// `n` vehicles evenly spaced around a closed loop, front vehicle first.
pub fn fill_ring(w: &mut World, n: usize, p: &DriverParams, v: f64, mode: Mode) {
    let lens: Vec<f64> = w.graph().edges.iter().map(|e| e.length).collect();
    let total: f64 = lens.iter().sum();
    for k in 0..n {
        let mut pos = total * (1.0 - k as f64 / n as f64) - 1e-3;
        let mut e = 0;
        while pos > lens[e] {
            pos -= lens[e];
            e += 1;
        }
        w.place_vehicle(Placement {
            edge: e as u32,
            lane: 0,
            s: pos,
            v,
            params: *p,
            mode,
            destination: None,
        })
        .unwrap();
    }
}
