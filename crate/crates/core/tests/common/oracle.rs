//! Independent reference implementations shared by the suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use urbsim::geom::PointXY;
use urbsim::ingest::{Direction, Polyline, RawNetwork, RoadAttributes, ZLevelTable};
use urbsim::routing::{TrafficGraph, WeightOverlay};
use urbsim::sim::{DriverParams, World};
use urbsim::topology::DEFAULT_EPS;

/// Quadratic reference matcher: each point joins the first earlier group
/// whose founding point is within `eps` on the same level.
pub fn brute_force_classes(raw: &RawNetwork, eps: f64) -> Vec<Vec<(usize, bool)>> {
    let mut founders: Vec<(PointXY, i32)> = Vec::new();
    let mut segments: Vec<u32> = Vec::new();
    let mut members: Vec<u32> = Vec::new();
    let mut group_of: Vec<Vec<usize>> = Vec::new();
    for pl in &raw.polylines {
        let mut ends = vec![false; pl.points.len()];
        for r in &pl.parts {
            ends[r.start] = true;
            ends[r.end - 1] = true;
        }
        let mut row = Vec::new();
        for (k, p) in pl.points.iter().enumerate() {
            let z = raw.zlevels.level(pl.id, k as u32);
            let found = founders.iter().position(|(q, qz)| {
                let d2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
                *qz == z && d2 <= eps * eps
            });
            let g = found.unwrap_or_else(|| {
                founders.push((*p, z));
                segments.push(0);
                members.push(0);
                founders.len() - 1
            });
            segments[g] += if ends[k] { 1 } else { 2 };
            members[g] += 1;
            row.push(g);
        }
        group_of.push(row);
    }
    group_of
        .into_iter()
        .map(|row| row.into_iter().map(|g| (g, !(segments[g] == 2 && members[g] == 1))).collect())
        .collect()
}

/// Polylines on a coarse lattice so that many points coincide, some of them
/// nudged by less than the tolerance and some lifted to another level.
pub fn random_network(rng: &mut ChaCha8Rng, max_points: usize) -> RawNetwork {
    let eps = DEFAULT_EPS;
    let mut lines = Vec::new();
    let mut z = ZLevelTable::default();
    let mut total = 0;
    while total < max_points {
        let n = rng.random_range(2..=8).min(max_points - total);
        if n < 2 {
            break;
        }
        let id = lines.len() as u32;
        let mut pts: Vec<PointXY> = Vec::with_capacity(n);
        while pts.len() < n {
            let mut p = PointXY::new(rng.random_range(0..8) as f64 * 10.0, rng.random_range(0..8) as f64 * 10.0);
            if rng.random_bool(0.3) {
                p.x += rng.random_range(-0.45..0.45) * eps;
                p.y += rng.random_range(-0.45..0.45) * eps;
            }
            if pts.last().is_some_and(|q| q.dist(&p) <= 3.0 * eps) {
                continue;
            }
            if rng.random_bool(0.05) {
                z.set(id, pts.len() as u32, 1);
            }
            pts.push(p);
        }
        total += n;
        lines.push(Polyline::single(id, pts));
    }
    let attrs = (0..lines.len() as u32)
        .map(|i| RoadAttributes {
            ordinal: i,
            lanes_forward: 1,
            lanes_backward: 1,
            speed_limit: 13.9,
            direction: Direction::Both,
        })
        .collect();
    RawNetwork::new(lines, attrs, z)
}

/// All-pairs reference costs.
pub fn floyd_warshall(g: &TrafficGraph, overlay: Option<&WeightOverlay>) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in &g.edges {
        let w = e.weight * overlay.map_or(1.0, |o| o.get(e.id));
        let cell = &mut d[e.from as usize][e.to as usize];
        *cell = cell.min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn path_cost(g: &TrafficGraph, path: &[u32]) -> f64 {
    path.iter().map(|&e| g.edges[e as usize].weight).sum()
}

/// Random strongly connected graph: a Hamiltonian cycle of one-way roads
/// through scattered points plus random chords, with varied limits and
/// lane counts.
pub fn random_strong_graph(rng: &mut ChaCha8Rng, n: usize) -> TrafficGraph {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| (i as f64 * 37.0 + rng.random_range(0.0..20.0), rng.random_range(0.0..1000.0)))
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for _ in 0..rng.random_range(n..3 * n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    let geoms: Vec<[(f64, f64); 2]> = pairs.iter().map(|&(a, b)| [pts[a], pts[b]]).collect();
    let specs: Vec<(u8, f64)> = pairs
        .iter()
        .map(|_| (rng.random_range(1..4), rng.random_range(5.0..30.0)))
        .collect();
    let roads: Vec<(&[(f64, f64)], u8, f64)> =
        geoms.iter().zip(&specs).map(|(g, &(l, v))| (g.as_slice(), l, v)).collect();
    super::network(&super::one_way(&roads)).graph.clone()
}

/// Bisection on `s0 + v T = gap * sqrt(1 - (v/v0)^delta)`.
pub fn oracle_equilibrium(p: &DriverParams, gap: f64, v0: f64) -> f64 {
    let f = |v: f64| gap * (1.0 - (v / v0).powf(p.delta)).sqrt() - p.s0 - v * p.headway;
    let (mut lo, mut hi) = (0.0, v0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Bumper gaps around a ring whose edges are numbered along the loop.
pub fn ring_gaps(w: &World) -> Vec<f64> {
    let offsets: Vec<f64> = w
        .graph()
        .edges
        .iter()
        .scan(0.0, |acc, e| {
            let o = *acc;
            *acc += e.length;
            Some(o)
        })
        .collect();
    let total: f64 = w.graph().edges.iter().map(|e| e.length).sum();
    let mut pos: Vec<(f64, f64)> = w.vehicles().map(|x| (offsets[x.edge as usize] + x.s, x.params.length)).collect();
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    (0..pos.len())
        .map(|i| {
            let (me, _) = pos[i];
            let (lead, len) = pos[(i + 1) % pos.len()];
            let ahead = if lead > me { lead - me } else { lead + total - me };
            ahead - len
        })
        .collect()
}
