//! The sequential half of a tick, applied in vehicle-id order.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::idm::idm_acceleration;
use super::lanes::choose_lane_on_entry;
use super::perceive::Intent;
use super::vehicle::{NextStep, NodeOccupant, PendingTrip, Vehicle};
use super::world::{agent_seed, TickReport, World, SALT_NODE};
use crate::behaviors::{bdi_update, BehaviorState, Mode};
use crate::routing::HOP_NONE;

impl World {
    /// Advance one time step.
    pub fn step(&mut self) -> TickReport {
        let intents = self.perceive_all();
        let mut rep = TickReport {
            tick: self.tick,
            ..TickReport::default()
        };
        self.apply_decisions(&intents);
        let (motion, rejected) = self.commit_claims(&intents, &mut rep);
        let motion = self.commit_lane_changes(&intents, motion, &mut rep);
        self.commit_kinematics(&intents, &motion, &mut rep);
        self.commit_nodes(&intents, &rejected, &mut rep);
        self.commit_spawns(&mut rep);
        self.commit_behaviors();
        self.commit_transporters();
        self.commit_metrics(&mut rep);
        self.tick += 1;
        rep
    }

    fn apply_decisions(&mut self, intents: &[Intent]) {
        for it in intents {
            let Some(d) = &it.decision else { continue };
            let x = self.veh_mut(it.id);
            x.next = Some(d.next);
            if let Some(p) = &d.plan {
                x.plan = p.clone();
            }
            if let Some(ds) = &d.desires {
                x.behavior.desires = ds.clone();
            }
        }
    }

    /// Resolve crossroad claims by `(waiting first, incoming rank, id)`.
    /// Returns each intent's `(acceleration, guard gap)` and whether its
    /// claim was refused.
    fn commit_claims(&mut self, intents: &[Intent], rep: &mut TickReport) -> (Vec<(f64, f64)>, Vec<bool>) {
        let g = &self.net.graph;
        let mut motion: Vec<(f64, f64)> = intents.iter().map(|it| (it.a_follow.min(it.a_end), it.g_follow.min(it.g_end))).collect();
        let mut rejected = vec![false; intents.len()];
        let mut order: Vec<(bool, u32, u32, usize)> = intents
            .iter()
            .enumerate()
            .filter(|(_, it)| it.claim.is_some())
            .map(|(k, it)| {
                let x = self.veh(it.id);
                (!x.waiting, g.edges[x.edge as usize].in_rank, it.id, k)
            })
            .collect();
        order.sort_unstable();
        // targets reserved for crossroad occupants ready to leave
        let reserved: BTreeSet<u32> = self
            .nodes
            .iter()
            .flatten()
            .filter(|o| o.ready_tick <= self.tick)
            .map(|o| o.target)
            .collect();
        let mut blocked_from: BTreeMap<u32, u32> = BTreeMap::new();
        for (not_waiting, _, id, k) in order {
            let it = &intents[k];
            let req = it.claim.expect("filtered");
            let t = req.target;
            let x = self.veh(id);
            let d = self.dist_to_end(x);
            let mut grant = None;
            let foreign_block = blocked_from.get(&t).is_some_and(|&src| src != x.edge);
            if let Some(tl) = req.lane {
                let leader_ok = self.leader_of(x).is_none_or(|l| l.claim.is_some());
                let open = !self.field.is_barred(t)
                    && leader_ok
                    && !(not_waiting && (reserved.contains(&t) || foreign_block))
                    && self.occupancy(t) < self.net.graph.edges[t as usize].capacity as usize;
                if open {
                    if let Ok(proj) = self.claim_gap_ok(x, d, t, tl) {
                        grant = Some((tl, proj));
                    }
                }
            }
            match grant {
                Some((tl, proj)) => {
                    let p = x.params;
                    let v0 = self.v0(x, x.edge).min(self.v0(x, t));
                    let (a_c, g_c) = match proj {
                        Some((gap, vl)) => (idm_acceleration(&p, x.v, v0, gap, x.v - vl), gap),
                        None => (idm_acceleration(&p, x.v, v0, f64::INFINITY, 0.0), f64::INFINITY),
                    };
                    motion[k] = (it.a_follow.min(a_c), it.g_follow.min(g_c));
                    let idx = self.lane_idx(t, tl);
                    self.queues[idx].push_back(id);
                    let x = self.veh_mut(id);
                    x.claim = Some((t, tl));
                    x.waiting = false;
                }
                None => {
                    if !not_waiting {
                        blocked_from.entry(t).or_insert(x.edge);
                    }
                    self.veh_mut(id).waiting = true;
                    rejected[k] = true;
                    rep.node_blocked += 1;
                }
            }
        }
        (motion, rejected)
    }

    fn commit_lane_changes(&mut self, intents: &[Intent], mut motion: Vec<(f64, f64)>, rep: &mut TickReport) -> Vec<(f64, f64)> {
        let mut used: BTreeSet<(u32, u8)> = BTreeSet::new();
        for (k, it) in intents.iter().enumerate() {
            let Some((tl, _)) = it.lane_change else { continue };
            let x = self.veh(it.id);
            if x.claim.is_some() || used.contains(&(x.edge, tl)) {
                continue;
            }
            let Some((a, gap)) = self.lane_change_eval(x, tl, it.a_end, it.g_end) else { continue };
            let (e, from) = (x.edge, x.lane);
            used.insert((e, tl));
            self.remove_from_lane(it.id, e, from);
            let tick = self.tick;
            let x = self.veh_mut(it.id);
            x.lane = tl;
            x.last_change_tick = Some(tick);
            self.insert_in_lane(it.id, e, tl);
            motion[k] = (a, gap);
            rep.lane_changes += 1;
        }
        motion
    }

    fn commit_kinematics(&mut self, intents: &[Intent], motion: &[(f64, f64)], rep: &mut TickReport) {
        let dt = self.cfg.sim.dt;
        let eps = self.cfg.sim.guard_eps;
        let mut gone = Vec::new();
        for (it, &(a, gap)) in intents.iter().zip(motion) {
            let id = it.id;
            let x = self.veh(id);
            let mut v = (x.v + a * dt).max(0.0);
            if v * dt > gap - eps {
                v = ((gap - eps) / dt).max(0.0);
                rep.emergency_brakes += 1;
            }
            let s = x.s + v * dt;
            let e = x.edge;
            let len = self.net.graph.edges[e as usize].length;
            if s < len {
                let x = self.veh_mut(id);
                x.s = s;
                x.v = v;
                continue;
            }
            match (x.claim, x.next) {
                (Some((t, tl)), _) => {
                    let lane = x.lane;
                    self.remove_from_lane(id, e, lane);
                    let qi = self.lane_idx(t, tl);
                    self.queues[qi].retain(|&i| i != id);
                    self.recorder.on_crossing(e);
                    if self.field.is_barred(t) {
                        rep.barred_entries += 1;
                    }
                    let t_len = self.net.graph.edges[t as usize].length;
                    let mut landed = s - len;
                    let x = self.veh_mut(id);
                    x.v = v;
                    if landed >= t_len {
                        landed = t_len;
                        x.v = 0.0;
                        rep.hard_stops += 1;
                    }
                    x.s = landed;
                    self.enter_edge(id, t, tl);
                }
                (None, Some(NextStep::Arrive | NextStep::Exit)) => {
                    let lane = x.lane;
                    self.recorder.on_crossing(e);
                    self.remove_from_lane(id, e, lane);
                    gone.push(id);
                }
                _ => {
                    let x = self.veh_mut(id);
                    x.s = len;
                    x.v = 0.0;
                    rep.hard_stops += 1;
                }
            }
        }
        for id in gone {
            self.despawn(id, rep);
        }
    }

    /// Move a vehicle that just left its edge (or a crossroad) onto `(t, tl)`.
    fn enter_edge(&mut self, id: u32, t: u32, tl: u8) {
        let x = self.veh_mut(id);
        let old = x.edge;
        x.behavior.recent_edges.push(old);
        if x.plan.front() == Some(&t) {
            x.plan.pop_front();
        }
        x.edge = t;
        x.lane = tl;
        x.claim = None;
        x.next = None;
        x.waiting = false;
        x.in_node = None;
        x.last_change_tick = None;
        self.insert_in_lane(id, t, tl);
        self.recorder.on_entry(t);
        self.entries_current[t as usize] += 1;
    }

    fn despawn(&mut self, id: u32, rep: &mut TickReport) {
        let x = self.vehicles[id as usize].take().expect("live vehicle");
        if let Ok(p) = self.active.binary_search(&id) {
            self.active.remove(p);
        }
        rep.despawned += 1;
        self.counters.despawned += 1;
        match x.next {
            Some(NextStep::Exit) => {
                rep.exits += 1;
                self.counters.exited += 1;
            }
            _ => {
                rep.arrivals += 1;
                self.counters.arrived += 1;
                let tt = (self.tick + 1 - x.spawn_tick) as f64 * self.cfg.sim.dt;
                self.recorder.on_trip_end(tt);
            }
        }
    }

    /// Refused vehicles may push into the crossroad; occupants whose
    /// traversal is over leave onto their target edge.
    fn commit_nodes(&mut self, intents: &[Intent], rejected: &[bool], rep: &mut TickReport) {
        let dt = self.cfg.sim.dt;
        for (it, &rej) in intents.iter().zip(rejected) {
            if !rej {
                continue;
            }
            let Some(x) = self.vehicle(it.id) else { continue };
            let Some(NextStep::Edge(t)) = x.next else { continue };
            let w = self.net.graph.edges[x.edge as usize].to;
            if x.claim.is_some()
                || !self.at_line(x)
                || self.field.is_barred(t)
                || self.nodes[w as usize].len() >= self.net.graph.vertices[w as usize].capacity as usize
                || it.u_block >= x.params.blocker_tendency
            {
                continue;
            }
            let (e, l) = (x.edge, x.lane);
            self.remove_from_lane(it.id, e, l);
            self.recorder.on_crossing(e);
            let ready = self.tick + (self.net.graph.traversal_delay(w) / dt).ceil() as u64;
            let x = self.veh_mut(it.id);
            x.in_node = Some(w);
            x.s = 0.0;
            x.v = 0.0;
            self.nodes[w as usize].push(NodeOccupant {
                id: it.id,
                target: t,
                ready_tick: ready,
            });
            rep.node_entries += 1;
        }

        let mut gone = Vec::new();
        for w in 0..self.nodes.len() {
            if self.nodes[w].is_empty() {
                continue;
            }
            let mut k = 0;
            while k < self.nodes[w].len() {
                let occ = self.nodes[w][k];
                if occ.ready_tick > self.tick {
                    k += 1;
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(self.cfg.seed, occ.id, self.tick, SALT_NODE));
                let mut target = occ.target;
                if self.field.is_barred(target) {
                    let d = self.decide(self.veh(occ.id), &mut rng);
                    let x = self.veh_mut(occ.id);
                    x.next = Some(d.next);
                    if let Some(p) = d.plan {
                        x.plan = p;
                    }
                    if let Some(ds) = d.desires {
                        x.behavior.desires = ds;
                    }
                    match d.next {
                        NextStep::Edge(t2) => {
                            target = t2;
                            self.nodes[w][k].target = t2;
                        }
                        NextStep::Arrive | NextStep::Exit => {
                            self.nodes[w].remove(k);
                            gone.push(occ.id);
                            continue;
                        }
                        NextStep::Park | NextStep::Stranded => {
                            k += 1;
                            continue;
                        }
                    }
                }
                let edge = &self.net.graph.edges[target as usize];
                let lanes = edge.lanes;
                let claims: usize = (0..lanes).map(|l| self.queues[self.lane_idx(target, l)].len()).sum();
                let room = self.edge_count(target) + claims < edge.capacity as usize;
                let x = self.veh(occ.id);
                let allowed: Vec<bool> = (0..lanes)
                    .map(|l| {
                        room && self.queues[self.lane_idx(target, l)].is_empty()
                            && self.lane_tail(target, l).is_none_or(|tail| tail.s - tail.params.length > x.params.s0)
                    })
                    .collect();
                let dens: Vec<f64> = (0..lanes).map(|l| self.lane_density(target, l)).collect();
                match choose_lane_on_entry(&dens, &allowed, self.cfg.sim.right_bias, &mut rng) {
                    Some(l) => {
                        self.nodes[w].remove(k);
                        let x = self.veh_mut(occ.id);
                        x.s = 0.0;
                        x.v = 0.0;
                        self.enter_edge(occ.id, target, l as u8);
                    }
                    None => k += 1,
                }
            }
        }
        for id in gone {
            self.despawn(id, rep);
        }
    }

    fn commit_spawns(&mut self, rep: &mut TickReport) {
        let dt = self.cfg.sim.dt;
        let lambda = self.spawn_rate * dt;
        if lambda > 0.0 {
            let k = Poisson::new(lambda).expect("positive rate").sample(&mut self.spawner) as u64;
            for _ in 0..k {
                let table = &self.net.table;
                match self.od.draw(&mut self.spawner, |o, d| table.hop(o, d) != HOP_NONE) {
                    Ok((o, d)) => {
                        let params = self.cfg.drivers.sample(&mut self.spawner);
                        self.pending.entry(o).or_default().push_back(PendingTrip {
                            origin: o,
                            destination: d,
                            params,
                            arrival_tick: self.tick,
                        });
                    }
                    Err(_) => self.counters.infeasible_trips += 1,
                }
            }
        }
        let origins: Vec<u32> = self.pending.keys().copied().collect();
        for o in origins {
            let trip = self.pending[&o].front().expect("non-empty queue").clone();
            let Some(path) = self.route(o, trip.destination) else {
                self.pop_pending(o);
                self.counters.stranded_at_source += 1;
                continue;
            };
            let first = path[0];
            let edge = &self.net.graph.edges[first as usize];
            if self.occupancy(first) >= edge.capacity as usize {
                continue;
            }
            let p = trip.params;
            let v0 = p.speed_compliance * edge.speed_limit;
            let mut speeds = Vec::with_capacity(edge.lanes as usize);
            let allowed: Vec<bool> = (0..edge.lanes)
                .map(|l| {
                    let sp = self.insertion_speed(&p, v0, first, l);
                    speeds.push(sp.unwrap_or(0.0));
                    sp.is_some()
                })
                .collect();
            let dens: Vec<f64> = (0..edge.lanes).map(|l| self.lane_density(first, l)).collect();
            let Some(l) = choose_lane_on_entry(&dens, &allowed, self.cfg.sim.right_bias, &mut self.spawner) else {
                continue;
            };
            self.pop_pending(o);
            let id = self.next_id;
            self.next_id += 1;
            let mut behavior = BehaviorState::new(p.saturation_threshold, p.stubbornness, self.cfg.behavior.recent_edges);
            behavior.desires.push_back(trip.destination);
            self.vehicles.push(Some(Vehicle {
                id,
                edge: first,
                lane: l as u8,
                s: 0.0,
                v: speeds[l],
                params: p,
                plan: path[1..].iter().copied().collect(),
                behavior,
                next: None,
                claim: None,
                waiting: false,
                in_node: None,
                last_change_tick: None,
                spawn_tick: self.tick,
            }));
            self.active.push(id);
            self.insert_in_lane(id, first, l as u8);
            self.recorder.on_entry(first);
            self.entries_current[first as usize] += 1;
            self.counters.spawned += 1;
            rep.spawned += 1;
            rep.routed.push((id, first));
        }
    }

    fn pop_pending(&mut self, o: u32) {
        let q = self.pending.get_mut(&o).expect("queue");
        q.pop_front();
        if q.is_empty() {
            self.pending.remove(&o);
        }
    }

    /// Speed at which a new vehicle may enter lane `l` at its start: the
    /// desired speed, else the tail's speed, else standstill. The nearest
    /// vehicle holding a claim onto the lane must be able to follow it.
    fn insertion_speed(&self, p: &super::DriverParams, v0: f64, e: u32, l: u8) -> Option<f64> {
        let claimant = self.queues[self.lane_idx(e, l)].front().map(|&c| self.veh(c));
        let follower_ok = |v: f64| match claimant {
            None => true,
            Some(c) => {
                let gap = self.dist_to_end(c) - p.length;
                let cv0 = self.v0(c, c.edge).min(self.v0(c, e));
                gap > c.params.s0 && idm_acceleration(&c.params, c.v, cv0, gap, c.v - v) >= -c.params.b_comfort
            }
        };
        let Some(tail) = self.lane_tail(e, l) else {
            return [v0, 0.0].into_iter().find(|&v| follower_ok(v));
        };
        let gap = tail.s - tail.params.length;
        if gap <= p.s0 {
            return None;
        }
        [v0, tail.v.min(v0), 0.0]
            .into_iter()
            .find(|&v| idm_acceleration(p, v, v0, gap, v - tail.v) >= -p.b_comfort && follower_ok(v))
    }

    fn commit_behaviors(&mut self) {
        let dt = self.cfg.sim.dt;
        let bp = self.cfg.behavior;
        let ids = self.active.clone();
        for id in ids {
            let pos = self.pose(self.veh(id)).0;
            let x = self.veh_mut(id);
            let change = bdi_update(&mut x.behavior, x.v, dt, &bp);
            let mut log = change;
            if let Some((_, Mode::JamEscape, _)) = change {
                x.behavior.jam_trigger = Some(pos);
            }
            if x.behavior.mode == Mode::JamEscape && log.is_none() {
                if let Some(trigger) = x.behavior.jam_trigger {
                    if trigger.dist(&pos) >= bp.resume_distance {
                        x.behavior.annoyance = 0.0;
                        x.behavior.jam_trigger = None;
                        x.behavior.set_mode(Mode::Normal);
                        log = Some((Mode::JamEscape, Mode::Normal, "escaped"));
                    }
                }
            }
            if let Some((from, to, reason)) = log {
                self.log_transition(id, from, to, reason);
            }
        }
    }

    fn commit_transporters(&mut self) {
        let g = &self.net.graph;
        let mut edge_counts = vec![(0u32, 0u32); g.edges.len()];
        let mut vertex_counts = vec![(0u32, 0u32); g.vertex_count()];
        for x in self.active.iter().map(|&i| self.veh(i)) {
            let slot = match x.in_node {
                Some(w) => &mut vertex_counts[w as usize],
                None => &mut edge_counts[x.edge as usize],
            };
            slot.0 += 1;
            slot.1 += x.behavior.is_annoyed() as u32;
        }
        self.field.set_counts(&edge_counts, &vertex_counts);
        self.field.estimate(self.tick);
        self.field.propagate_warnings();
        let net = self.net.clone();
        self.field.retable_dirty(&net.graph, &mut self.live, &net.table, self.tick);
    }

    fn commit_metrics(&mut self, rep: &mut TickReport) {
        let dt = self.cfg.sim.dt;
        let g = &self.net.graph;
        for &id in &self.active {
            let x = self.vehicles[id as usize].as_ref().expect("live vehicle");
            if x.in_node.is_some() {
                self.recorder.on_mode_time(x.behavior.mode);
                continue;
            }
            self.recorder.on_vehicle(x.edge, x.v, x.behavior.mode);
            let limit = x.params.speed_compliance * g.edges[x.edge as usize].speed_limit;
            if x.v > limit + x.params.a_max * dt + 1e-9 {
                rep.speed_violations += 1;
            }
            rep.stranded += x.is_stranded() as u32;
        }
        for lane in &self.lanes {
            for w in lane.windows(2) {
                let (a, b) = (self.veh(w[0]), self.veh(w[1]));
                if !(a.s - a.params.length - b.s > 0.0) {
                    rep.safety_violations += 1;
                }
            }
        }
        self.recorder.on_concurrent(self.active.len() as u64);
        self.recorder.end_tick(self.tick);
        let flow_ticks = ((self.cfg.behavior.flow_window / dt).round() as u64).max(1);
        if (self.tick + 1) % flow_ticks == 0 {
            self.entries_last.copy_from_slice(&self.entries_current);
            self.entries_current.iter_mut().for_each(|c| *c = 0);
        }
        rep.queued = self.queued_trips() as u32;
        rep.in_world = self.active.len() as u32;
        let c = &mut self.counters;
        c.lane_changes += rep.lane_changes as u64;
        c.node_entries += rep.node_entries as u64;
        c.emergency_brakes += rep.emergency_brakes as u64;
        c.hard_stops += rep.hard_stops as u64;
        c.barred_entries += rep.barred_entries as u64;
        c.safety_violations += rep.safety_violations as u64;
        c.speed_violations += rep.speed_violations as u64;
    }
}
