//! Per-edge fundamental-diagram sampling, run summaries and CSV export.

mod export;

pub use export::{encumbrance_csv, fd_samples_csv, summary_csv, transitions_csv, write_all, FD_HEADER};

use serde::Serialize;
use thiserror::Error;

use crate::behaviors::Mode;
use crate::sim::{equilibrium_flow, DriverParams};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot write {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One closed window on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeWindowSample {
    pub edge: u32,
    pub window_start_s: f64,
    pub duration_s: f64,
    /// veh/km/lane
    pub density: f64,
    /// veh/h, all lanes
    pub flow: f64,
    /// m/s
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct EdgeAcc {
    veh_seconds: f64,
    speed_seconds: f64,
    crossings: u32,
    entries: u32,
    population_start: i64,
}

/// Audit failure: entries and exits do not explain the population change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationBreach {
    pub edge: u32,
    pub window_start_s: f64,
    pub entries: u32,
    pub exits: u32,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub spawned: u64,
    pub arrived: u64,
    /// Left the network through a gateway.
    pub exited: u64,
    pub stranded: u64,
    pub stranded_at_source: u64,
    pub mean_travel_time_s: f64,
    /// Vehicle-time share per mode, in `Mode::ALL` order.
    pub mode_shares: Vec<(Mode, f64)>,
    pub peak_concurrent: u64,
}

/// Accumulates edge occupancy and detector counts over fixed windows.
#[derive(Debug, Clone)]
pub struct Recorder {
    dt: f64,
    window_ticks: u64,
    lengths_km: Vec<f64>,
    lanes: Vec<u8>,
    acc: Vec<EdgeAcc>,
    population: Vec<i64>,
    window_start_tick: u64,
    pub samples: Vec<EdgeWindowSample>,
    pub breaches: Vec<ConservationBreach>,
    pub total_veh_seconds: f64,
    pub mode_seconds: [f64; 8],
    pub travel_time_sum: f64,
    pub travel_count: u64,
    pub peak_concurrent: u64,
}

impl Recorder {
    pub fn new(lengths: &[f64], lanes: &[u8], dt: f64, window_s: f64) -> Self {
        let window_ticks = ((window_s / dt).round() as u64).max(1);
        Self {
            dt,
            window_ticks,
            lengths_km: lengths.iter().map(|l| l / 1000.0).collect(),
            lanes: lanes.to_vec(),
            acc: vec![EdgeAcc::default(); lengths.len()],
            population: vec![0; lengths.len()],
            window_start_tick: 0,
            samples: Vec::new(),
            breaches: Vec::new(),
            total_veh_seconds: 0.0,
            mode_seconds: [0.0; 8],
            travel_time_sum: 0.0,
            travel_count: 0,
            peak_concurrent: 0,
        }
    }

    pub fn window_ticks(&self) -> u64 {
        self.window_ticks
    }

    pub fn on_entry(&mut self, e: u32) {
        self.acc[e as usize].entries += 1;
        self.population[e as usize] += 1;
    }

    /// A vehicle passed the detector at the end of `e`.
    pub fn on_crossing(&mut self, e: u32) {
        self.acc[e as usize].crossings += 1;
        self.population[e as usize] -= 1;
    }

    pub fn on_vehicle(&mut self, e: u32, v: f64, mode: Mode) {
        let a = &mut self.acc[e as usize];
        a.veh_seconds += self.dt;
        a.speed_seconds += v * self.dt;
        self.total_veh_seconds += self.dt;
        self.mode_seconds[mode.index()] += self.dt;
    }

    /// Vehicles off the edges (inside crossroads) still count toward mode time.
    pub fn on_mode_time(&mut self, mode: Mode) {
        self.mode_seconds[mode.index()] += self.dt;
    }

    pub fn on_trip_end(&mut self, travel_time_s: f64) {
        self.travel_time_sum += travel_time_s;
        self.travel_count += 1;
    }

    pub fn on_concurrent(&mut self, n: u64) {
        self.peak_concurrent = self.peak_concurrent.max(n);
    }

    /// Call after tick `tick` has been committed; closes a window when due.
    pub fn end_tick(&mut self, tick: u64) {
        if (tick + 1 - self.window_start_tick) >= self.window_ticks {
            self.close_window(tick + 1);
        }
    }

    /// Emit samples for edges used since the window opened and reset.
    pub fn close_window(&mut self, end_tick: u64) {
        let ticks = end_tick - self.window_start_tick;
        if ticks == 0 {
            return;
        }
        let w = ticks as f64 * self.dt;
        let start_s = self.window_start_tick as f64 * self.dt;
        for (e, a) in self.acc.iter_mut().enumerate() {
            let delta = self.population[e] - a.population_start;
            if a.entries as i64 - a.crossings as i64 != delta {
                self.breaches.push(ConservationBreach {
                    edge: e as u32,
                    window_start_s: start_s,
                    entries: a.entries,
                    exits: a.crossings,
                    delta,
                });
            }
            if a.veh_seconds > 0.0 {
                let lanes = self.lanes[e] as f64;
                self.samples.push(EdgeWindowSample {
                    edge: e as u32,
                    window_start_s: start_s,
                    duration_s: w,
                    density: a.veh_seconds / (w * self.lengths_km[e] * lanes),
                    flow: a.crossings as f64 * 3600.0 / w,
                    speed: a.speed_seconds / a.veh_seconds,
                });
            }
            *a = EdgeAcc {
                population_start: self.population[e],
                ..EdgeAcc::default()
            };
        }
        self.window_start_tick = end_tick;
    }

    pub fn mode_shares(&self) -> Vec<(Mode, f64)> {
        let total: f64 = self.mode_seconds.iter().sum();
        Mode::ALL
            .iter()
            .map(|&m| {
                let share = if total > 0.0 { self.mode_seconds[m.index()] / total } else { 0.0 };
                (m, share)
            })
            .collect()
    }
}

/// Share of samples whose flow lies within `tolerance` of the equilibrium
/// flow at their density. `None` without samples.
pub fn fd_envelope_check(
    samples: &[EdgeWindowSample],
    lanes: &[u8],
    p: &DriverParams,
    v_desired: impl Fn(u32) -> f64,
    tolerance: f64,
) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let ok = samples
        .iter()
        .filter(|s| {
            let q = equilibrium_flow(p, s.density, v_desired(s.edge)) * lanes[s.edge as usize] as f64;
            (s.flow - q).abs() <= tolerance * q
        })
        .count();
    Some(ok as f64 / samples.len() as f64)
}
