//! The read-only half of a tick: every vehicle looks at the previous state
//! and states what it would like to do.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::idm::idm_acceleration;
use super::lanes::{choose_lane_on_entry, classify_turn, turn_lane};
use super::vehicle::{NextStep, Vehicle};
use super::world::{agent_seed, World, SALT_PERCEIVE};
use crate::behaviors::{chicken_next_edge, local_next_edge, planar_next_edge, Candidate, Mode, SpectatorClass};
use crate::geom::point_along;
use crate::routing::{path_with_overlay, shortest_path, HOP_SELF};

/// Dead band around straight ahead when classifying turns.
const TURN_THRESHOLD_DEG: f64 = 30.0;
/// Extra margin in the lane-change gap tests, m.
const CHANGE_MARGIN: f64 = 0.1;
/// A rejected vehicle this close to the line may push into the crossroad, m.
const LINE_ZONE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Decision {
    pub next: NextStep,
    pub plan: Option<VecDeque<u32>>,
    pub desires: Option<VecDeque<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct ClaimRequest {
    pub target: u32,
    /// `None` when no lane of the target looked acceptable.
    pub lane: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Intent {
    pub id: u32,
    pub a_follow: f64,
    /// Gap to the same-lane leader.
    pub g_follow: f64,
    /// End-of-edge constraint without a new claim.
    pub a_end: f64,
    pub g_end: f64,
    pub decision: Option<Decision>,
    pub claim: Option<ClaimRequest>,
    pub lane_change: Option<(u8, bool)>,
    /// Draw for pushing into the crossroad.
    pub u_block: f64,
}

impl World {
    pub(super) fn perceive_all(&self) -> Vec<Intent> {
        let ids: Vec<u32> = self.active.iter().copied().filter(|&i| self.veh(i).in_node.is_none()).collect();
        match &self.pool {
            Some(pool) => pool.install(|| ids.par_iter().map(|&i| self.perceive(i)).collect()),
            None => ids.iter().map(|&i| self.perceive(i)).collect(),
        }
    }

    /// Planned route from `from` to `to` through the live rows, falling back
    /// to a fresh search when rows loop or lead across a barred edge. `None`
    /// when every way crosses a barred edge.
    pub(super) fn route(&self, from: u32, to: u32) -> Option<Vec<u32>> {
        let g = &self.net.graph;
        if let Ok(p) = shortest_path(&self.live, g, from, to) {
            if !p.iter().any(|&e| self.field.is_barred(e)) {
                return Some(p);
            }
        }
        match path_with_overlay(g, from, to, Some(&self.field.overlay)) {
            Some((p, _, false)) => Some(p),
            _ => None,
        }
    }

    /// Non-barred ways out of `w`; the way back to `came_from` is dropped
    /// when another exists.
    pub(super) fn candidates(&self, w: u32, came_from: Option<u32>) -> Vec<Candidate> {
        let g = &self.net.graph;
        let all: Vec<Candidate> = g.vertices[w as usize]
            .out_edges
            .iter()
            .filter(|&&e| !self.field.is_barred(e))
            .map(|&e| {
                let edge = &g.edges[e as usize];
                Candidate {
                    edge: e,
                    far: g.vertices[edge.to as usize].position,
                    density: self.edge_density(e),
                    flow: self.entries_last[e as usize],
                }
            })
            .collect();
        match came_from {
            Some(back) if all.iter().any(|c| g.edges[c.edge as usize].to != back) => {
                all.into_iter().filter(|c| g.edges[c.edge as usize].to != back).collect()
            }
            _ => all,
        }
    }

    /// Choose what to do at the end of the current edge.
    pub(super) fn decide(&self, x: &Vehicle, rng: &mut ChaCha8Rng) -> Decision {
        let g = &self.net.graph;
        let edge = &g.edges[x.edge as usize];
        let w = edge.to;
        let local = |mode: Mode, rng: &mut ChaCha8Rng| {
            let c = self.candidates(w, Some(edge.from));
            match local_next_edge(mode, &c, &x.behavior.recent_edges, rng) {
                Some(e) => Decision {
                    next: NextStep::Edge(e),
                    plan: Some(VecDeque::from([e])),
                    desires: None,
                },
                None => stranded(),
            }
        };
        let mode = x.behavior.mode;
        let desires = &x.behavior.desires;
        if mode == Mode::JamEscape && !desires.is_empty() && desires.iter().all(|&d| d == w) {
            return Decision {
                next: NextStep::Arrive,
                plan: None,
                desires: Some(VecDeque::new()),
            };
        }
        if g.vertices[w as usize].out_edges.is_empty() && !mode.has_destination() {
            // a sink leads out of the network
            return Decision {
                next: NextStep::Exit,
                plan: None,
                desires: None,
            };
        }
        match mode {
            Mode::Normal | Mode::Pragmatic => self.decide_planned(x, w, rng),
            Mode::Spectator => {
                if Some(w) == self.event_spot {
                    return Decision {
                        next: NextStep::Park,
                        plan: None,
                        desires: None,
                    };
                }
                match self.cfg.behavior.spectator_class {
                    SpectatorClass::Global => self.decide_planned(x, w, rng),
                    SpectatorClass::Planar => {
                        let Some(target) = x.behavior.crisis.as_ref().map(|c| c.position) else {
                            return local(Mode::Wandering, rng);
                        };
                        let here = g.vertices[w as usize].position;
                        let bearing = here.bearing_to(&target);
                        match planar_next_edge(g, w, bearing, self.cfg.behavior.planar_horizon, &x.behavior.recent_edges, |e| {
                            self.field.is_barred(e)
                        }) {
                            Ok(e) => Decision {
                                next: NextStep::Edge(e),
                                plan: Some(VecDeque::from([e])),
                                desires: None,
                            },
                            Err(_) => local(Mode::Wandering, rng),
                        }
                    }
                }
            }
            Mode::Chicken => {
                if self.net.gateways[w as usize] {
                    return Decision {
                        next: NextStep::Exit,
                        plan: None,
                        desires: None,
                    };
                }
                let Some(event) = x.behavior.crisis.as_ref().map(|c| c.position) else {
                    return local(Mode::Wandering, rng);
                };
                let c = self.candidates(w, None);
                match chicken_next_edge(&g.vertices[w as usize].position, &event, &c) {
                    Some(e) => Decision {
                        next: NextStep::Edge(e),
                        plan: Some(VecDeque::from([e])),
                        desires: None,
                    },
                    None => stranded(),
                }
            }
            Mode::JamEscape => match local(mode, rng) {
                d if d.next == NextStep::Stranded => self.decide_planned(x, w, rng),
                d => d,
            },
            m @ (Mode::Wandering | Mode::Roadrunner | Mode::Sheep) => local(m, rng),
        }
    }

    fn decide_planned(&self, x: &Vehicle, w: u32, rng: &mut ChaCha8Rng) -> Decision {
        let g = &self.net.graph;
        let mut desires = x.behavior.desires.clone();
        let mut desires_changed = false;
        while desires.front() == Some(&w) {
            desires.pop_front();
            desires_changed = true;
        }
        let Some(&dest) = desires.front() else {
            let next = if x.behavior.mode == Mode::Spectator { NextStep::Park } else { NextStep::Arrive };
            return Decision {
                next,
                plan: None,
                desires: desires_changed.then_some(desires),
            };
        };
        let desires = desires_changed.then_some(desires);
        let valid = !desires_changed && x.plan.front().is_some_and(|&e| g.edges[e as usize].from == w);
        let mut plan: VecDeque<u32> = if valid {
            x.plan.clone()
        } else {
            match self.route(w, dest) {
                Some(p) => p.into(),
                None => {
                    return Decision {
                        desires,
                        ..stranded()
                    }
                }
            }
        };
        let mut changed = !valid;
        let planned = plan[0];
        if self.field.is_barred(planned) {
            match path_with_overlay(g, w, dest, Some(&self.field.overlay)) {
                Some((p, _, false)) => {
                    plan = p.into();
                    changed = true;
                }
                _ => {
                    return Decision {
                        desires,
                        ..stranded()
                    }
                }
            }
        } else if self.field.is_encumbered(planned) {
            let u: f64 = rng.random();
            if u >= x.behavior.stubbornness {
                let h = self.live.hop(w, dest);
                if h < HOP_SELF {
                    let hop = g.out_edge(w, h);
                    if hop != planned && !self.field.is_barred(hop) {
                        let fresh = match shortest_path(&self.live, g, w, dest) {
                            Ok(p) if p[0] == hop && !p.iter().any(|&e| self.field.is_barred(e)) => Some(p),
                            _ => path_with_overlay(g, w, dest, Some(&self.field.overlay)).and_then(|(p, _, b)| (!b).then_some(p)),
                        };
                        if let Some(p) = fresh {
                            plan = p.into();
                            changed = true;
                        }
                    }
                }
            }
        }
        Decision {
            next: NextStep::Edge(plan[0]),
            plan: changed.then_some(plan),
            desires,
        }
    }

    pub(super) fn perceive(&self, id: u32) -> Intent {
        let x = self.veh(id);
        let g = &self.net.graph;
        let edge = &g.edges[x.edge as usize];
        let p = &x.params;
        let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(self.cfg.seed, id, self.tick, SALT_PERCEIVE));
        let u_block: f64 = rng.random();
        let d = edge.length - x.s;
        let d_dec = p.s0 + x.v * p.headway + x.v * x.v / (2.0 * p.b_comfort) + self.cfg.sim.decision_margin;

        let mut next = x.next;
        let redo = match next {
            None => d <= d_dec,
            Some(NextStep::Stranded) => true,
            Some(NextStep::Edge(t)) => x.claim.is_none() && self.field.is_barred(t),
            _ => false,
        };
        let decision = if redo && x.claim.is_none() {
            let dcs = self.decide(x, &mut rng);
            next = Some(dcs.next);
            Some(dcs)
        } else {
            None
        };

        let mut v0 = self.v0(x, x.edge);
        if let Some((t, _)) = x.claim {
            v0 = v0.min(self.v0(x, t));
        }
        let (a_follow, g_follow) = match self.leader_of(x) {
            Some(l) => {
                let gap = l.s - l.params.length - x.s;
                (idm_acceleration(p, x.v, v0, gap, x.v - l.v), gap)
            }
            None => (idm_acceleration(p, x.v, v0, f64::INFINITY, 0.0), f64::INFINITY),
        };

        let free = (idm_acceleration(p, x.v, v0, f64::INFINITY, 0.0), f64::INFINITY);
        let stop_line = || {
            let gap = (d + p.s0 - 1.0).max(1e-3);
            (idm_acceleration(p, x.v, v0, gap, x.v), d)
        };
        let mut claim = None;
        let (a_end, g_end) = match (x.claim, next) {
            (Some((t, tl)), _) => match self.projected_leader(id, d, t, tl) {
                Some((gap, vl)) => (idm_acceleration(p, x.v, v0, gap, x.v - vl), gap),
                None => free,
            },
            (None, Some(NextStep::Arrive | NextStep::Exit)) => free,
            (None, Some(NextStep::Park | NextStep::Stranded)) => stop_line(),
            (None, Some(NextStep::Edge(t))) => {
                claim = Some(ClaimRequest {
                    target: t,
                    lane: self.pick_claim_lane(x, d, t, &mut rng),
                });
                stop_line()
            }
            (None, None) => {
                let ahead = x.plan.front().filter(|&&e| g.edges[e as usize].from == edge.to);
                match ahead.and_then(|&e| self.edge_tail(e)) {
                    Some(tail) => {
                        let gap = d + tail.s - tail.params.length;
                        (idm_acceleration(p, x.v, v0, gap, x.v - tail.v), f64::INFINITY)
                    }
                    None => free,
                }
            }
        };

        let lane_change = self.lane_change_intent(x, d, next, a_follow.min(a_end), a_end, g_end);
        Intent {
            id,
            a_follow,
            g_follow,
            a_end,
            g_end,
            decision,
            claim,
            lane_change,
            u_block,
        }
    }

    /// Projected entry test for one target lane: `Some((gap, leader speed))`
    /// or `None` for an empty lane when acceptable.
    pub(super) fn claim_gap_ok(&self, x: &Vehicle, d: f64, t: u32, tl: u8) -> Result<Option<(f64, f64)>, ()> {
        let p = &x.params;
        match self.projected_leader(x.id, d, t, tl) {
            Some((gap, vl)) => {
                let v0 = self.v0(x, x.edge).min(self.v0(x, t));
                if gap > p.s0 && idm_acceleration(p, x.v, v0, gap, x.v - vl) >= -p.b_comfort {
                    Ok(Some((gap, vl)))
                } else {
                    Err(())
                }
            }
            None => Ok(None),
        }
    }

    fn pick_claim_lane(&self, x: &Vehicle, d: f64, t: u32, rng: &mut ChaCha8Rng) -> Option<u8> {
        let lanes = self.net.graph.edges[t as usize].lanes;
        let allowed: Vec<bool> = (0..lanes).map(|l| self.claim_gap_ok(x, d, t, l).is_ok()).collect();
        let dens: Vec<f64> = (0..lanes).map(|l| self.lane_density(t, l)).collect();
        choose_lane_on_entry(&dens, &allowed, self.cfg.sim.right_bias, rng).map(|l| l as u8)
    }

    /// Lane the vehicle must be in for its next turn, when close to the end.
    fn required_lane(&self, x: &Vehicle, d: f64, next: Option<NextStep>) -> Option<u8> {
        let g = &self.net.graph;
        let edge = &g.edges[x.edge as usize];
        if d > self.cfg.sim.turn_zone || edge.lanes < 2 {
            return None;
        }
        let out = match next {
            Some(NextStep::Edge(t)) => t,
            _ => *x.plan.front().filter(|&&e| g.edges[e as usize].from == edge.to)?,
        };
        let h_in = point_along(&edge.geometry, edge.length).1;
        let h_out = point_along(&g.edges[out as usize].geometry, 0.0).1;
        turn_lane(classify_turn(h_in, h_out, TURN_THRESHOLD_DEG.to_radians()), edge.lanes)
    }

    fn lane_change_intent(&self, x: &Vehicle, d: f64, next: Option<NextStep>, a_cur: f64, a_end: f64, g_end: f64) -> Option<(u8, bool)> {
        let sp = &self.cfg.sim;
        let lanes = self.net.graph.edges[x.edge as usize].lanes;
        if lanes < 2 || x.claim.is_some() || x.s < sp.no_change_start {
            return None;
        }
        if let Some(t) = x.last_change_tick {
            if (self.tick - t) as f64 * sp.dt < sp.lane_change_cooldown {
                return None;
            }
        }
        let required = self.required_lane(x, d, next);
        let options: Vec<(u8, bool)> = match required {
            Some(r) if r == x.lane => return None,
            Some(r) => vec![(if r > x.lane { x.lane + 1 } else { x.lane - 1 }, true)],
            None => [x.lane.checked_sub(1), (x.lane + 1 < lanes).then_some(x.lane + 1)]
                .into_iter()
                .flatten()
                .map(|l| (l, false))
                .collect(),
        };
        let mut best: Option<(f64, u8, bool)> = None;
        for (tl, mandatory) in options {
            let Some((a, _)) = self.lane_change_eval(x, tl, a_end, g_end) else { continue };
            if !mandatory && a - a_cur < sp.lane_change_threshold {
                continue;
            }
            if best.is_none_or(|(ba, _, _)| a > ba) {
                best = Some((a, tl, mandatory));
            }
        }
        best.map(|(_, l, m)| (l, m))
    }

    /// Safety test for moving `x` into lane `tl` of its edge. Returns the
    /// acceleration it would have there and the gap it must respect.
    pub(super) fn lane_change_eval(&self, x: &Vehicle, tl: u8, a_end: f64, g_end: f64) -> Option<(f64, f64)> {
        let dt = self.cfg.sim.dt;
        let p = &x.params;
        let lane = &self.lanes[self.lane_idx(x.edge, tl)];
        let split = lane.partition_point(|&o| self.veh(o).s >= x.s);
        let v0 = self.v0(x, x.edge);
        let (a_front, g_front) = match split.checked_sub(1).map(|i| self.veh(lane[i])) {
            Some(l) => {
                let gap = l.s - l.params.length - x.s;
                if gap <= (x.v + p.a_max * dt) * dt + CHANGE_MARGIN {
                    return None;
                }
                (idm_acceleration(p, x.v, v0, gap, x.v - l.v), gap)
            }
            None => (idm_acceleration(p, x.v, v0, f64::INFINITY, 0.0), f64::INFINITY),
        };
        if let Some(f) = lane.get(split).map(|&o| self.veh(o)) {
            if f.claim.is_some() {
                return None;
            }
            let gap = x.s - p.length - f.s;
            let fp = &f.params;
            if gap <= (f.v + fp.a_max * dt) * dt + CHANGE_MARGIN {
                return None;
            }
            let fv0 = self.v0(f, f.edge);
            if idm_acceleration(fp, f.v, fv0, gap, f.v - x.v) < -fp.b_comfort {
                return None;
            }
        }
        Some((a_front.min(a_end), g_front.min(g_end)))
    }

    /// Whether a rejected vehicle stands at its stop line.
    pub(super) fn at_line(&self, x: &Vehicle) -> bool {
        self.dist_to_end(x) < LINE_ZONE && x.v < self.cfg.sim.stop_speed
    }
}

fn stranded() -> Decision {
    Decision {
        next: NextStep::Stranded,
        plan: None,
        desires: None,
    }
}
