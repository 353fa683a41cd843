use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::params::{DriverDistributions, DriverParams, SimParams};
use super::vehicle::{NextStep, NodeOccupant, PendingTrip, Vehicle};
use super::SimError;
use crate::behaviors::{BehaviorParams, BehaviorState, CrisisEvent, Mode, OdSampler, OdScenario, Transition};
use crate::geom::{hull_boundary, point_along, PointXY};
use crate::metrics::{Recorder, RunSummary};
use crate::routing::{NextHopTable, TrafficGraph};
use crate::transporters::{EncumbranceField, TransporterParams};

/// Hull vertices within this distance of the boundary act as gateways, m.
const GATEWAY_TOLERANCE: f64 = 1.0;

/// The immutable part of a simulation: graph, static tables and gateways.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: TrafficGraph,
    pub table: NextHopTable,
    /// Vertices on the network's outer boundary.
    pub gateways: Vec<bool>,
}

impl Network {
    pub fn new(graph: TrafficGraph, table: NextHopTable) -> Self {
        let gateways = hull_boundary(&graph.positions(), GATEWAY_TOLERANCE);
        Self { graph, table, gateways }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    pub sim: SimParams,
    pub behavior: BehaviorParams,
    pub transporters: TransporterParams,
    pub drivers: DriverDistributions,
    pub od: OdScenario,
    /// Trip arrivals, veh/s.
    pub spawn_rate: f64,
    /// Fundamental-diagram window, s.
    pub metrics_window: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sim: SimParams::default(),
            behavior: BehaviorParams::default(),
            transporters: TransporterParams::default(),
            drivers: DriverDistributions::default(),
            od: OdScenario::default(),
            spawn_rate: 0.0,
            metrics_window: 300.0,
        }
    }
}

/// What happened during one tick.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TickReport {
    pub tick: u64,
    pub spawned: u32,
    pub despawned: u32,
    pub arrivals: u32,
    pub exits: u32,
    pub lane_changes: u32,
    /// Claims refused at a crossroad.
    pub node_blocked: u32,
    pub node_entries: u32,
    pub emergency_brakes: u32,
    pub hard_stops: u32,
    pub stranded: u32,
    pub queued: u32,
    pub in_world: u32,
    pub safety_violations: u32,
    pub speed_violations: u32,
    pub barred_entries: u32,
    /// `(vehicle, first edge)` of this tick's insertions.
    pub routed: Vec<(u32, u32)>,
}

/// Running totals since the world was created.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Counters {
    pub spawned: u64,
    pub despawned: u64,
    pub arrived: u64,
    pub exited: u64,
    pub stranded_at_source: u64,
    pub infeasible_trips: u64,
    pub lane_changes: u64,
    pub node_entries: u64,
    pub emergency_brakes: u64,
    pub hard_stops: u64,
    pub barred_entries: u64,
    pub safety_violations: u64,
    pub speed_violations: u64,
}

/// Initial state of a vehicle placed directly on an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub edge: u32,
    pub lane: u8,
    pub s: f64,
    pub v: f64,
    pub params: DriverParams,
    pub mode: Mode,
    pub destination: Option<u32>,
}

pub struct World {
    pub(super) net: Arc<Network>,
    pub(super) cfg: WorldConfig,
    pub(super) tick: u64,
    pub(super) vehicles: Vec<Option<Vehicle>>,
    /// Ids of live vehicles, ascending.
    pub(super) active: Vec<u32>,
    pub(super) lane_base: Vec<usize>,
    /// Vehicle ids per `(edge, lane)`, front first.
    pub(super) lanes: Vec<Vec<u32>>,
    /// Claim holders per `(edge, lane)` in grant order.
    pub(super) queues: Vec<VecDeque<u32>>,
    pub(super) nodes: Vec<Vec<NodeOccupant>>,
    pub(super) field: EncumbranceField,
    pub(super) live: NextHopTable,
    pub(super) od: OdSampler,
    pub(super) spawner: ChaCha8Rng,
    pub(super) spawn_rate: f64,
    pub(super) pending: BTreeMap<u32, VecDeque<PendingTrip>>,
    pub(super) next_id: u32,
    pub(super) event: Option<CrisisEvent>,
    /// Vertex nearest the active event.
    pub(super) event_spot: Option<u32>,
    pub(super) entries_current: Vec<u32>,
    pub(super) entries_last: Vec<u32>,
    pub(super) counters: Counters,
    pub(super) transitions: Vec<Transition>,
    pub(super) recorder: Recorder,
    pub(super) pool: Option<rayon::ThreadPool>,
}

pub(super) const SALT_PERCEIVE: u64 = 0x7065_7263;
pub(super) const SALT_CRISIS: u64 = 0x6372_6973;
pub(super) const SALT_NODE: u64 = 0x6e6f_6465;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-agent, per-tick stream seed.
pub(super) fn agent_seed(seed: u64, id: u32, tick: u64, salt: u64) -> u64 {
    splitmix(seed ^ splitmix(id as u64 ^ splitmix(tick ^ splitmix(salt))))
}

impl World {
    pub fn new(net: Arc<Network>, cfg: WorldConfig) -> Result<Self, SimError> {
        cfg.drivers.validate().map_err(SimError::Config)?;
        cfg.od.validate(net.graph.vertex_count()).map_err(SimError::Config)?;
        if !(cfg.sim.dt > 0.0 && cfg.sim.dt.is_finite()) {
            return Err(SimError::Config("dt must be positive".into()));
        }
        if !(cfg.spawn_rate >= 0.0 && cfg.spawn_rate.is_finite()) {
            return Err(SimError::Config("spawn rate must be non-negative".into()));
        }
        let g = &net.graph;
        let mut lane_base = Vec::with_capacity(g.edges.len());
        let mut total = 0;
        for e in &g.edges {
            lane_base.push(total);
            total += e.lanes as usize;
        }
        let pool = if cfg.sim.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.sim.workers)
                    .build()
                    .map_err(|e| SimError::Config(e.to_string()))?,
            )
        } else {
            None
        };
        let lengths: Vec<f64> = g.edges.iter().map(|e| e.length).collect();
        let lane_counts: Vec<u8> = g.edges.iter().map(|e| e.lanes).collect();
        Ok(Self {
            field: EncumbranceField::new(g, cfg.transporters),
            live: net.table.clone(),
            od: OdSampler::new(&cfg.od, &g.positions()),
            spawner: ChaCha8Rng::seed_from_u64(cfg.seed),
            spawn_rate: cfg.spawn_rate,
            pending: BTreeMap::new(),
            next_id: 0,
            event: None,
            event_spot: None,
            entries_current: vec![0; g.edges.len()],
            entries_last: vec![0; g.edges.len()],
            counters: Counters::default(),
            transitions: Vec::new(),
            recorder: Recorder::new(&lengths, &lane_counts, cfg.sim.dt, cfg.metrics_window),
            tick: 0,
            vehicles: Vec::new(),
            active: Vec::new(),
            lanes: vec![Vec::new(); total],
            queues: vec![VecDeque::new(); total],
            nodes: vec![Vec::new(); g.vertex_count()],
            lane_base,
            pool,
            net,
            cfg,
        })
    }

    pub fn network(&self) -> &Arc<Network> {
        &self.net
    }

    pub fn graph(&self) -> &TrafficGraph {
        &self.net.graph
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.sim.dt
    }

    pub fn vehicle_count(&self) -> usize {
        self.active.len()
    }

    pub fn queued_trips(&self) -> usize {
        self.pending.values().map(|q| q.len()).sum()
    }

    pub fn vehicle(&self, id: u32) -> Option<&Vehicle> {
        self.vehicles.get(id as usize).and_then(|v| v.as_ref())
    }

    /// Live vehicles in id order.
    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> + '_ {
        self.active.iter().map(move |&id| self.veh(id))
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn field(&self) -> &EncumbranceField {
        &self.field
    }

    pub fn live_table(&self) -> &NextHopTable {
        &self.live
    }

    pub fn recorder(&self) -> &Recorder {
        &self.recorder
    }

    pub fn recorder_mut(&mut self) -> &mut Recorder {
        &mut self.recorder
    }

    pub fn spawn_rate(&self) -> f64 {
        self.spawn_rate
    }

    pub fn event(&self) -> Option<&CrisisEvent> {
        self.event.as_ref()
    }

    pub fn node_occupants(&self, v: u32) -> &[NodeOccupant] {
        &self.nodes[v as usize]
    }

    /// Vehicle ids in `(edge, lane)`, front first.
    pub fn lane(&self, edge: u32, lane: u8) -> &[u32] {
        &self.lanes[self.lane_idx(edge, lane)]
    }

    pub fn edge_count(&self, e: u32) -> usize {
        let edge = &self.net.graph.edges[e as usize];
        (0..edge.lanes).map(|l| self.lanes[self.lane_idx(e, l)].len()).sum()
    }

    /// veh/km/lane
    pub fn edge_density(&self, e: u32) -> f64 {
        let edge = &self.net.graph.edges[e as usize];
        self.edge_count(e) as f64 / (edge.length / 1000.0 * edge.lanes as f64)
    }

    pub fn lane_density(&self, e: u32, l: u8) -> f64 {
        let edge = &self.net.graph.edges[e as usize];
        self.lanes[self.lane_idx(e, l)].len() as f64 / (edge.length / 1000.0)
    }

    /// Position and heading of a vehicle.
    pub fn pose(&self, x: &Vehicle) -> (PointXY, f64) {
        if let Some(v) = x.in_node {
            let g = &self.net.graph;
            let p = g.vertices[v as usize].position;
            let h = point_along(&g.edges[x.edge as usize].geometry, f64::INFINITY).1;
            return (p, h);
        }
        point_along(&self.net.graph.edges[x.edge as usize].geometry, x.s)
    }

    pub(super) fn lane_idx(&self, e: u32, l: u8) -> usize {
        self.lane_base[e as usize] + l as usize
    }

    pub(super) fn veh(&self, id: u32) -> &Vehicle {
        self.vehicles[id as usize].as_ref().expect("live vehicle")
    }

    pub(super) fn veh_mut(&mut self, id: u32) -> &mut Vehicle {
        self.vehicles[id as usize].as_mut().expect("live vehicle")
    }

    pub(super) fn v0(&self, x: &Vehicle, e: u32) -> f64 {
        x.desired_speed(self.net.graph.edges[e as usize].speed_limit)
    }

    /// Same-lane vehicle directly ahead.
    pub(super) fn leader_of(&self, x: &Vehicle) -> Option<&Vehicle> {
        let lane = &self.lanes[self.lane_idx(x.edge, x.lane)];
        let pos = lane.iter().position(|&i| i == x.id)?;
        (pos > 0).then(|| self.veh(lane[pos - 1]))
    }

    /// Same-lane vehicle directly behind.
    pub(super) fn follower_of(&self, x: &Vehicle) -> Option<&Vehicle> {
        let lane = &self.lanes[self.lane_idx(x.edge, x.lane)];
        let pos = lane.iter().position(|&i| i == x.id)?;
        lane.get(pos + 1).map(|&i| self.veh(i))
    }

    pub(super) fn lane_tail(&self, e: u32, l: u8) -> Option<&Vehicle> {
        self.lanes[self.lane_idx(e, l)].last().map(|&i| self.veh(i))
    }

    /// The rearmost vehicle over all lanes of `e`.
    pub(super) fn edge_tail(&self, e: u32) -> Option<&Vehicle> {
        let lanes = self.net.graph.edges[e as usize].lanes;
        (0..lanes)
            .filter_map(|l| self.lane_tail(e, l))
            .min_by(|a, b| (a.s - a.params.length).total_cmp(&(b.s - b.params.length)).then(a.id.cmp(&b.id)))
    }

    /// Distance to the end of the current edge.
    pub(super) fn dist_to_end(&self, x: &Vehicle) -> f64 {
        self.net.graph.edges[x.edge as usize].length - x.s
    }

    /// Gap and speed of the vehicle that will precede one standing `d` before
    /// the end of its edge once it enters `(t, tl)`.
    pub(super) fn projected_leader(&self, me: u32, d: f64, t: u32, tl: u8) -> Option<(f64, f64)> {
        let q = &self.queues[self.lane_idx(t, tl)];
        let ahead = match q.iter().position(|&i| i == me) {
            Some(p) => p.checked_sub(1).map(|p| q[p]),
            None => q.back().copied(),
        };
        if let Some(p) = ahead {
            let pv = self.veh(p);
            return Some((d - self.dist_to_end(pv) - pv.params.length, pv.v));
        }
        self.lane_tail(t, tl).map(|tail| (d + tail.s - tail.params.length, tail.v))
    }

    /// Vehicles on `e`, holding claims onto it or crossing toward it.
    pub(super) fn occupancy(&self, e: u32) -> usize {
        let edge = &self.net.graph.edges[e as usize];
        let claims: usize = (0..edge.lanes).map(|l| self.queues[self.lane_idx(e, l)].len()).sum();
        let crossing = self.nodes[edge.from as usize].iter().filter(|o| o.target == e).count();
        self.edge_count(e) + claims + crossing
    }

    pub(super) fn insert_in_lane(&mut self, id: u32, e: u32, l: u8) {
        let s = self.veh(id).s;
        let idx = self.lane_idx(e, l);
        let lane = &self.lanes[idx];
        let vehicles = &self.vehicles;
        let pos = lane.partition_point(|&o| vehicles[o as usize].as_ref().expect("live vehicle").s > s);
        self.lanes[idx].insert(pos, id);
    }

    pub(super) fn remove_from_lane(&mut self, id: u32, e: u32, l: u8) {
        let idx = self.lane_idx(e, l);
        if let Some(p) = self.lanes[idx].iter().position(|&i| i == id) {
            self.lanes[idx].remove(p);
        }
    }

    pub(super) fn remove_claim(&mut self, id: u32) {
        if let Some((t, tl)) = self.veh_mut(id).claim.take() {
            let idx = self.lane_idx(t, tl);
            self.queues[idx].retain(|&i| i != id);
        }
    }

    pub(super) fn log_transition(&mut self, agent: u32, from: Mode, to: Mode, reason: &'static str) {
        self.transitions.push(Transition {
            tick: self.tick,
            agent,
            from,
            to,
            reason,
        });
    }

    /// Put a vehicle straight onto an edge. It must not overlap its lane
    /// neighbors.
    pub fn place_vehicle(&mut self, p: Placement) -> Result<u32, SimError> {
        let g = &self.net.graph;
        let edge = g.edges.get(p.edge as usize).ok_or(SimError::UnknownEdge(p.edge))?;
        if p.lane >= edge.lanes || !(p.s >= 0.0 && p.s <= edge.length) || !(p.v >= 0.0) {
            return Err(SimError::Config(format!("bad placement on edge {}", p.edge)));
        }
        let idx = self.lane_idx(p.edge, p.lane);
        for &o in &self.lanes[idx] {
            let ov = self.veh(o);
            let (front, back) = if ov.s >= p.s { (ov.s - ov.params.length, p.s) } else { (p.s - p.params.length, ov.s) };
            if front - back <= 0.0 {
                return Err(SimError::Config(format!("placement overlaps vehicle {o}")));
            }
        }
        let mut plan = VecDeque::new();
        let mut behavior = BehaviorState::new(p.params.saturation_threshold, p.params.stubbornness, self.cfg.behavior.recent_edges);
        if let Some(dest) = p.destination {
            let path = self.route(edge.to, dest).ok_or(SimError::Config(format!("vertex {dest} unreachable")))?;
            plan.extend(path);
            behavior.desires.push_back(dest);
        }
        behavior.mode = p.mode;
        let id = self.next_id;
        self.next_id += 1;
        self.vehicles.push(Some(Vehicle {
            id,
            edge: p.edge,
            lane: p.lane,
            s: p.s,
            v: p.v,
            params: p.params,
            plan,
            behavior,
            next: None,
            claim: None,
            waiting: false,
            in_node: None,
            last_change_tick: None,
            spawn_tick: self.tick,
        }));
        self.active.push(id);
        self.insert_in_lane(id, p.edge, p.lane);
        self.counters.spawned += 1;
        self.recorder.on_entry(p.edge);
        Ok(id)
    }

    pub fn set_spawn_rate(&mut self, rate: f64) -> Result<(), SimError> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(SimError::Config("spawn rate must be non-negative".into()));
        }
        self.spawn_rate = rate;
        if rate == 0.0 {
            self.pending.clear();
        }
        Ok(())
    }

    /// Close or reopen an edge to new entries.
    pub fn bar_edge(&mut self, e: u32, on: bool) -> Result<(), SimError> {
        self.field.bar(e, on, self.tick).map_err(|_| SimError::UnknownEdge(e))?;
        if !on {
            return Ok(());
        }
        let lanes = self.net.graph.edges[e as usize].lanes;
        let mut work: Vec<u32> = Vec::new();
        for l in 0..lanes {
            let idx = self.lane_idx(e, l);
            work.extend(self.queues[idx].iter().copied());
        }
        // claims behind a revoked one would jump the queue it leaves
        while let Some(id) = work.pop() {
            if self.veh(id).claim.is_none() {
                continue;
            }
            self.remove_claim(id);
            self.veh_mut(id).next = None;
            let mut behind = self.follower_of(self.veh(id)).map(|f| f.id);
            while let Some(f) = behind {
                if self.veh(f).claim.is_some() {
                    work.push(f);
                }
                behind = self.follower_of(self.veh(f)).map(|x| x.id);
            }
        }
        for &id in &self.active {
            let x = self.vehicles[id as usize].as_mut().expect("live vehicle");
            if x.next == Some(NextStep::Edge(e)) && x.claim.is_none() && x.in_node.is_none() {
                x.next = None;
            }
        }
        Ok(())
    }

    /// Register a crisis: every agent perceives it at once.
    pub fn explode(&mut self, event: CrisisEvent) -> Result<(), SimError> {
        event.validate().map_err(SimError::Config)?;
        use rand::Rng;
        let net = self.net.clone();
        let g = &net.graph;
        let spot = g
            .vertices
            .iter()
            .min_by(|a, b| a.position.dist(&event.position).total_cmp(&b.position.dist(&event.position)).then(a.id.cmp(&b.id)))
            .map(|v| v.id);
        self.event_spot = spot;
        let ids = self.active.clone();
        for id in ids {
            let pos = self.pose(self.veh(id)).0;
            let mut rng = ChaCha8Rng::seed_from_u64(agent_seed(self.cfg.seed, id, self.tick, SALT_CRISIS));
            let Some(mode) = crate::behaviors::on_crisis(&event, &pos, &mut rng) else { continue };
            let at = g.edges[self.veh(id).edge as usize].to;
            let fresh = if mode == Mode::Pragmatic {
                let n = g.vertex_count() as u32;
                (0..100)
                    .map(|_| rng.random_range(0..n))
                    .find(|&c| c != at && self.net.table.hop(at, c) != crate::routing::HOP_NONE)
            } else {
                None
            };
            let tick = self.tick;
            let x = self.veh_mut(id);
            x.behavior.crisis = Some(crate::behaviors::CrisisBelief {
                position: event.position,
                cause: "explosion".into(),
                learn_tick: tick,
            });
            let from = x.behavior.mode;
            if mode == Mode::Normal || mode == from {
                continue;
            }
            x.behavior.set_mode(mode);
            match mode {
                Mode::Pragmatic => {
                    if let Some(f) = fresh {
                        x.behavior.desires.push_front(f);
                    }
                }
                Mode::Spectator => {
                    x.behavior.desires.clear();
                    if let Some(s) = spot {
                        x.behavior.desires.push_back(s);
                    }
                }
                _ => {}
            }
            if x.claim.is_none() && x.in_node.is_none() {
                x.next = None;
            }
            self.log_transition(id, from, mode, "crisis");
        }
        self.event = Some(event);
        Ok(())
    }

    /// Live vehicles per mode, in `Mode::ALL` order.
    pub fn mode_counts(&self) -> [usize; 8] {
        let mut c = [0; 8];
        for x in self.vehicles() {
            c[x.behavior.mode.index()] += 1;
        }
        c
    }

    pub fn stranded_count(&self) -> usize {
        self.vehicles().filter(|x| x.is_stranded()).count()
    }

    pub fn summary(&self) -> RunSummary {
        let r = &self.recorder;
        RunSummary {
            spawned: self.counters.spawned,
            arrived: self.counters.arrived,
            exited: self.counters.exited,
            stranded: self.stranded_count() as u64,
            stranded_at_source: self.counters.stranded_at_source,
            mean_travel_time_s: if r.travel_count > 0 { r.travel_time_sum / r.travel_count as f64 } else { 0.0 },
            mode_shares: r.mode_shares(),
            peak_concurrent: r.peak_concurrent,
        }
    }

    /// Broken runtime invariants, one line each.
    pub fn violations(&self) -> Vec<String> {
        let c = &self.counters;
        let mut out = Vec::new();
        if c.safety_violations > 0 {
            out.push(format!("{} non-positive gaps", c.safety_violations));
        }
        if c.speed_violations > 0 {
            out.push(format!("{} negative or non-finite speeds", c.speed_violations));
        }
        if c.barred_entries > 0 {
            out.push(format!("{} entries onto barred edges", c.barred_entries));
        }
        if !self.recorder.breaches.is_empty() {
            out.push(format!("{} conservation breaches", self.recorder.breaches.len()));
        }
        out
    }

    /// 64-bit FNV-1a digest of the dynamic state.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.u64(self.tick);
        h.u64(self.active.len() as u64);
        for x in self.vehicles() {
            h.u64(x.id as u64);
            h.u64(x.edge as u64);
            h.u64(x.lane as u64);
            h.f64(x.s);
            h.f64(x.v);
            h.u64(x.behavior.mode.index() as u64);
            h.f64(x.behavior.annoyance);
            h.f64(x.behavior.saturation_threshold);
            h.u64(x.claim.map_or(u64::MAX, |(t, l)| ((t as u64) << 8) | l as u64));
            h.u64(match x.next {
                None => u64::MAX,
                Some(NextStep::Edge(e)) => e as u64,
                Some(NextStep::Arrive) => u64::MAX - 1,
                Some(NextStep::Exit) => u64::MAX - 2,
                Some(NextStep::Park) => u64::MAX - 3,
                Some(NextStep::Stranded) => u64::MAX - 4,
            });
            h.u64(x.in_node.map_or(u64::MAX, |v| v as u64));
            h.u64(x.waiting as u64);
            h.u64(x.plan.len() as u64);
            for &e in &x.plan {
                h.u64(e as u64);
            }
            for &d in &x.behavior.desires {
                h.u64(d as u64);
            }
        }
        for (v, occ) in self.nodes.iter().enumerate() {
            for o in occ {
                h.u64(v as u64);
                h.u64(o.id as u64);
                h.u64(o.target as u64);
                h.u64(o.ready_tick);
            }
        }
        for (o, q) in &self.pending {
            h.u64(*o as u64);
            for t in q {
                h.u64(t.destination as u64);
                h.u64(t.arrival_tick);
            }
        }
        for t in &self.field.edges {
            h.u64(t.encumbered as u64 | (t.barred as u64) << 1);
        }
        h.u64(self.spawner.get_word_pos() as u64);
        h.u64((self.spawner.get_word_pos() >> 64) as u64);
        h.u64(self.counters.spawned);
        h.u64(self.counters.despawned);
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
