use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::command::{Command, ScriptedEvent};
use crate::behaviors::{validate_mixture, BehaviorParams, Mixture, Mode, OdScenario};
use crate::ingest::{ColumnMapping, SyntheticSpec};
use crate::routing::GraphParams;
use crate::sim::{DriverDistributions, SimParams, WorldConfig};
use crate::transporters::TransporterParams;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {msg}")]
    Read { path: String, msg: String },
    #[error("bad config: {0}")]
    Parse(String),
    #[error("bad value for `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        msg: msg.into(),
    }
}

/// Where the road network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    Synthetic(SyntheticSpec),
    Files(NetworkFiles),
    /// Directory written by `build-network`.
    Cache(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFiles {
    pub shp: PathBuf,
    pub dbf: PathBuf,
    /// CSV of `polyline,ordinal,level`.
    #[serde(default)]
    pub zlevels: Option<PathBuf>,
    #[serde(default)]
    pub columns: ColumnMapping,
}

/// Mixtures used by explosions that do not carry their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrisisDefaults {
    pub inside: Mixture,
    pub outside: Mixture,
}

impl Default for CrisisDefaults {
    fn default() -> Self {
        Self {
            inside: BTreeMap::from([
                (Mode::Chicken, 0.5),
                (Mode::Spectator, 0.1),
                (Mode::Pragmatic, 0.1),
                (Mode::Wandering, 0.1),
                (Mode::Roadrunner, 0.1),
                (Mode::Sheep, 0.1),
            ]),
            outside: BTreeMap::from([(Mode::Normal, 0.7), (Mode::Spectator, 0.15), (Mode::Pragmatic, 0.15)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub network: NetworkSource,
    /// Seed of synthetic network jitter.
    pub network_seed: u64,
    /// Snapping tolerance when matching polyline points, m.
    pub snap_tolerance: f64,
    pub graph: GraphParams,
    pub od: OdScenario,
    /// Trip arrivals, veh/s.
    pub spawn_rate: f64,
    pub drivers: DriverDistributions,
    pub behavior: BehaviorParams,
    pub crisis: CrisisDefaults,
    pub transporters: TransporterParams,
    pub sim: SimParams,
    pub duration_s: f64,
    pub seed: u64,
    pub metrics_window_s: f64,
    /// Live snapshots go out every this many ticks.
    pub snapshot_every: u64,
    /// Above this many vehicles snapshots carry an even subsample.
    pub snapshot_max_vehicles: usize,
    pub events: Vec<ScriptedEvent>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            network: NetworkSource::Synthetic(SyntheticSpec::grid(10, 10, 300.0)),
            network_seed: 0,
            snap_tolerance: 0.01,
            graph: GraphParams::default(),
            od: OdScenario::default(),
            spawn_rate: 0.5,
            drivers: DriverDistributions::default(),
            behavior: BehaviorParams::default(),
            crisis: CrisisDefaults::default(),
            transporters: TransporterParams::default(),
            sim: SimParams::default(),
            duration_s: 3600.0,
            seed: 0,
            metrics_window_s: 300.0,
            snapshot_every: 4,
            snapshot_max_vehicles: 20_000,
            events: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and validate a config file. Relative network paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.network {
            NetworkSource::Files(f) => {
                fix(&mut f.shp);
                fix(&mut f.dbf);
                if let Some(z) = &mut f.zlevels {
                    fix(z);
                }
            }
            NetworkSource::Cache(d) => fix(d),
            NetworkSource::Synthetic(_) => {}
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn duration_ticks(&self) -> u64 {
        (self.duration_s / self.sim.dt).round() as u64
    }

    /// Checks that need no network.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(key, "must be positive"))
            }
        };
        pos("sim.dt", self.sim.dt)?;
        pos("snap_tolerance", self.snap_tolerance)?;
        pos("metrics_window_s", self.metrics_window_s)?;
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(invalid("duration_s", "must be non-negative"));
        }
        if !(self.spawn_rate.is_finite() && self.spawn_rate >= 0.0) {
            return Err(invalid("spawn_rate", "must be non-negative"));
        }
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every", "must be at least 1"));
        }
        if self.sim.workers == 0 {
            return Err(invalid("sim.workers", "must be at least 1"));
        }
        self.drivers.validate().map_err(|e| invalid("drivers", e))?;
        validate_mixture(&self.crisis.inside).map_err(|e| invalid("crisis.inside", e))?;
        validate_mixture(&self.crisis.outside).map_err(|e| invalid("crisis.outside", e))?;
        let tp = &self.transporters;
        if !(tp.base_threshold > 0.0 && tp.base_threshold < 1.0) {
            return Err(invalid("transporters.base_threshold", "must lie in (0, 1)"));
        }
        if !(tp.hysteresis > 0.0 && tp.hysteresis <= 1.0) {
            return Err(invalid("transporters.hysteresis", "must lie in (0, 1]"));
        }
        if tp.retable_budget == 0 {
            return Err(invalid("transporters.retable_budget", "must be at least 1"));
        }
        let end = self.duration_ticks();
        for (i, ev) in self.events.iter().enumerate() {
            let key = format!("events[{i}]");
            if ev.at_tick > end {
                return Err(invalid(&key, format!("tick {} is past the end of the run ({end})", ev.at_tick)));
            }
            match &ev.event {
                Command::Pause | Command::Resume | Command::Speed { .. } => {
                    return Err(invalid(&key, "pause, resume and speed are live-only commands"))
                }
                c => c.validate().map_err(|e| invalid(&key, e))?,
            }
        }
        Ok(())
    }

    /// Checks against the built network.
    pub fn validate_against(&self, vertex_count: usize, edge_count: usize) -> Result<(), ConfigError> {
        self.od.validate(vertex_count).map_err(|e| invalid("od", e))?;
        for (i, ev) in self.events.iter().enumerate() {
            if let Command::BarEdge { edge } | Command::UnbarEdge { edge } = ev.event {
                if edge as usize >= edge_count {
                    return Err(invalid(&format!("events[{i}]"), format!("unknown edge {edge}")));
                }
            }
        }
        Ok(())
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            seed: self.seed,
            sim: self.sim,
            behavior: self.behavior,
            transporters: self.transporters,
            drivers: self.drivers,
            od: self.od.clone(),
            spawn_rate: self.spawn_rate,
            metrics_window: self.metrics_window_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ScenarioConfig::from_json(r#"{"sim": {"dt": 0.5, "dtt": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("dtt"), "{e}");
    }

    #[test]
    fn events_past_the_end_are_rejected() {
        let text = r#"{"duration_s": 10, "events": [{"at_tick": 21, "event": {"type": "bar_edge", "edge": 0}}]}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn round_trip() {
        let mut c = ScenarioConfig::default();
        c.events.push(ScriptedEvent {
            at_tick: 4,
            cmd_id: None,
            event: Command::SpawnRate { rate: 2.0 },
        });
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
