use std::collections::VecDeque;

use rand::Rng;

use super::state::{Horizon, Mode, RecentEdges};
use super::BehaviorError;
use crate::geom::{angle_between, apex_angle, PointXY};
use crate::routing::TrafficGraph;

/// One outgoing option at a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub edge: u32,
    /// Position of the edge's far vertex.
    pub far: PointXY,
    /// veh/km/lane
    pub density: f64,
    /// Vehicles that entered during the last completed flow window.
    pub flow: u32,
}

/// The candidate whose far vertex makes the widest angle with the event at
/// `at`; ties go to the lower edge id.
pub fn chicken_next_edge(at: &PointXY, event: &PointXY, candidates: &[Candidate]) -> Option<u32> {
    let mut best: Option<(f64, u32)> = None;
    for c in candidates {
        let a = apex_angle(at, event, &c.far);
        let better = match best {
            None => true,
            Some((ba, be)) => a > ba || (a == ba && c.edge < be),
        };
        if better {
            best = Some((a, c.edge));
        }
    }
    best.map(|(_, e)| e)
}

/// Choice for the local crisis modes. `candidates` should already exclude
/// barred edges.
pub fn local_next_edge<R: Rng + ?Sized>(
    mode: Mode,
    candidates: &[Candidate],
    recent: &RecentEdges,
    rng: &mut R,
) -> Option<u32> {
    if candidates.is_empty() {
        return None;
    }
    match mode {
        Mode::Roadrunner | Mode::JamEscape => {
            let fresh: Vec<&Candidate> = candidates.iter().filter(|c| !recent.contains(c.edge)).collect();
            let pool: Vec<&Candidate> = if fresh.is_empty() { candidates.iter().collect() } else { fresh };
            pool.into_iter()
                .min_by(|a, b| a.density.total_cmp(&b.density).then(a.edge.cmp(&b.edge)))
                .map(|c| c.edge)
        }
        Mode::Sheep => candidates
            .iter()
            .max_by(|a, b| a.flow.cmp(&b.flow).then(b.edge.cmp(&a.edge)))
            .map(|c| c.edge),
        _ => Some(candidates[rng.random_range(0..candidates.len())].edge),
    }
}

/// Steer toward `bearing`: among vertices inside the horizon, take the one
/// whose direction deviates least from it (farther, then lower id, on ties)
/// and return the first edge of the breadth-first path to it.
pub fn planar_next_edge(
    g: &TrafficGraph,
    v: u32,
    bearing: f64,
    horizon: Horizon,
    recent: &RecentEdges,
    blocked: impl Fn(u32) -> bool,
) -> Result<u32, BehaviorError> {
    let origin = g.vertices[v as usize].position;
    let n = g.vertex_count();
    // (first edge, entry edge, hops) per reached vertex
    let mut reach: Vec<Option<(u32, u32, u32)>> = vec![None; n];
    let mut queue = VecDeque::new();
    let mut seen = vec![false; n];
    seen[v as usize] = true;
    queue.push_back((v, 0u32, u32::MAX));
    while let Some((u, hops, first)) = queue.pop_front() {
        let within = match horizon {
            Horizon::Hops { limit } => hops < limit,
            Horizon::Euclidean { .. } => true,
        };
        if !within {
            continue;
        }
        for &e in &g.vertices[u as usize].out_edges {
            if blocked(e) {
                continue;
            }
            let w = g.edges[e as usize].to;
            if seen[w as usize] {
                continue;
            }
            if let Horizon::Euclidean { limit } = horizon {
                if g.vertices[w as usize].position.dist(&origin) > limit {
                    continue;
                }
            }
            seen[w as usize] = true;
            let f = if first == u32::MAX { e } else { first };
            reach[w as usize] = Some((f, e, hops + 1));
            queue.push_back((w, hops + 1, f));
        }
    }

    let pick = |skip_recent: bool| {
        let mut best: Option<(f64, f64, u32, u32)> = None;
        for (w, r) in reach.iter().enumerate() {
            let Some((first, entry, _)) = *r else { continue };
            if skip_recent && recent.contains(entry) {
                continue;
            }
            let p = g.vertices[w].position;
            let dev = angle_between(bearing, origin.bearing_to(&p));
            let dist = origin.dist(&p);
            let better = match best {
                None => true,
                Some((bd, bdist, bw, _)) => dev < bd || (dev == bd && (dist > bdist || (dist == bdist && (w as u32) < bw))),
            };
            if better {
                best = Some((dev, dist, w as u32, first));
            }
        }
        best.map(|b| b.3)
    };
    pick(true).or_else(|| pick(false)).ok_or(BehaviorError::NoCandidate { vertex: v })
}
