use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::command::{Command, ScriptedEvent};
use super::config::{ConfigError, CrisisDefaults, NetworkSource, ScenarioConfig};
use super::network::{build_network, BuildError};
use crate::behaviors::CrisisEvent;
use crate::geom::PointXY;
use crate::ingest::{generate_synthetic, load_network, ZLevelTable};
use crate::metrics::{write_all, RunSummary};
use crate::routing::{weights_csv, NextHopTable, TrafficGraph};
use crate::sim::{Network, SimError, World};

#[derive(Debug, Error, PartialEq)]
pub enum ApplyError {
    #[error("unknown edge {0}")]
    UnknownEdge(u32),
    #[error("malformed event: {0}")]
    MalformedEvent(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("writing outputs: {0}")]
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Build(_) | RunError::Output(_) => 3,
        }
    }
}

const CACHE_GRAPH: &str = "network.json";
const CACHE_TABLE: &str = "next_hop.bin";
const CACHE_WEIGHTS: &str = "weights.csv";

fn read(path: &Path) -> Result<Vec<u8>, BuildError> {
    std::fs::read(path).map_err(|e| BuildError::Io(format!("{}: {e}", path.display())))
}

/// Build or load the network named by the config.
pub fn load_scenario_network(cfg: &ScenarioConfig) -> Result<Network, BuildError> {
    match &cfg.network {
        NetworkSource::Synthetic(spec) => {
            let raw = generate_synthetic(spec, cfg.network_seed)?;
            build_network(&raw, cfg.snap_tolerance, &cfg.graph)
        }
        NetworkSource::Files(f) => {
            let shp = read(&f.shp)?;
            let dbf = read(&f.dbf)?;
            let z = match &f.zlevels {
                Some(p) => {
                    let text = String::from_utf8(read(p)?).map_err(|e| BuildError::Io(e.to_string()))?;
                    Some(ZLevelTable::parse_csv(&text)?)
                }
                None => None,
            };
            let raw = load_network(&shp, &dbf, z.as_ref(), &f.columns)?;
            build_network(&raw, cfg.snap_tolerance, &cfg.graph)
        }
        NetworkSource::Cache(dir) => {
            let graph: TrafficGraph =
                serde_json::from_slice(&read(&dir.join(CACHE_GRAPH))?).map_err(|e| BuildError::Io(format!("{CACHE_GRAPH}: {e}")))?;
            let table = NextHopTable::from_bytes(&read(&dir.join(CACHE_TABLE))?)?;
            if table.vertex_count() != graph.vertex_count() {
                return Err(BuildError::Io(format!(
                    "cached table covers {} vertices, graph has {}",
                    table.vertex_count(),
                    graph.vertex_count()
                )));
            }
            Ok(Network::new(graph, table))
        }
    }
}

/// Write the prebuilt graph, tables and edge weights to `dir`.
pub fn write_network_cache(net: &Network, dir: &Path) -> Result<(), BuildError> {
    let io = |e: std::io::Error| BuildError::Io(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    let graph = serde_json::to_vec(&net.graph).map_err(|e| BuildError::Io(e.to_string()))?;
    std::fs::write(dir.join(CACHE_GRAPH), graph).map_err(io)?;
    std::fs::write(dir.join(CACHE_TABLE), net.table.to_bytes()).map_err(io)?;
    std::fs::write(dir.join(CACHE_WEIGHTS), weights_csv(&net.graph)).map_err(io)
}

/// Apply one operator or scripted command to the world.
pub fn apply_command(w: &mut World, cmd: &Command, defaults: &CrisisDefaults) -> Result<(), ApplyError> {
    cmd.validate().map_err(ApplyError::MalformedEvent)?;
    let sim = |e: SimError| match e {
        SimError::UnknownEdge(id) => ApplyError::UnknownEdge(id),
        SimError::Config(m) => ApplyError::MalformedEvent(m),
    };
    match cmd {
        Command::BarEdge { edge } => w.bar_edge(*edge, true).map_err(sim),
        Command::UnbarEdge { edge } => w.bar_edge(*edge, false).map_err(sim),
        Command::Explosion {
            x,
            y,
            radius,
            intensity,
            inside,
            outside,
        } => {
            let event = CrisisEvent {
                position: PointXY::new(*x, *y),
                radius: *radius,
                start_tick: w.tick(),
                intensity: *intensity,
                inside: inside.clone().unwrap_or_else(|| defaults.inside.clone()),
                outside: outside.clone().unwrap_or_else(|| defaults.outside.clone()),
            };
            w.explode(event).map_err(sim)
        }
        Command::SpawnRate { rate } => w.set_spawn_rate(*rate).map_err(sim),
        Command::Pause | Command::Resume | Command::Speed { .. } => {
            Err(ApplyError::MalformedEvent("pacing commands do not act on the world".into()))
        }
    }
}

/// A world plus its remaining scripted events.
pub struct Session {
    pub world: World,
    pub crisis: CrisisDefaults,
    pub end_tick: u64,
    script: VecDeque<ScriptedEvent>,
}

impl Session {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        let net = load_scenario_network(cfg)?;
        Self::with_network(cfg, Arc::new(net))
    }

    pub fn with_network(cfg: &ScenarioConfig, net: Arc<Network>) -> Result<Self, RunError> {
        cfg.validate()?;
        cfg.validate_against(net.graph.vertex_count(), net.graph.edges.len())?;
        let world = World::new(net, cfg.world_config()).map_err(|e| {
            ConfigError::Invalid {
                key: "world".into(),
                msg: e.to_string(),
            }
        })?;
        let mut script: Vec<ScriptedEvent> = cfg.events.clone();
        script.sort_by_key(|e| e.at_tick);
        Ok(Self {
            world,
            crisis: cfg.crisis.clone(),
            end_tick: cfg.duration_ticks(),
            script: script.into(),
        })
    }

    pub fn finished(&self) -> bool {
        self.world.tick() >= self.end_tick
    }

    /// Apply scripted events due at the current tick boundary.
    pub fn apply_due(&mut self) {
        while self.script.front().is_some_and(|e| e.at_tick <= self.world.tick()) {
            let ev = self.script.pop_front().expect("non-empty");
            if let Err(e) = apply_command(&mut self.world, &ev.event, &self.crisis) {
                log::warn!("scripted event at tick {} failed: {e}", ev.at_tick);
            }
        }
    }

    /// Events due now, then one tick.
    pub fn advance(&mut self) {
        self.apply_due();
        self.world.step();
    }
}

/// Result of a headless run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub hash: u64,
    pub ticks: u64,
    pub summary: RunSummary,
    /// Broken runtime invariants; empty on a clean run.
    pub violations: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            4
        }
    }
}

/// Run a scenario to its end and export metrics to `out` when given.
pub fn run_headless(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<RunReport, RunError> {
    let mut s = Session::new(cfg)?;
    run_session(&mut s, out)
}

pub fn run_session(s: &mut Session, out: Option<&Path>) -> Result<RunReport, RunError> {
    while !s.finished() {
        s.advance();
    }
    s.apply_due();
    let w = &s.world;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| RunError::Output(e.to_string()))?;
        write_all(dir, &w.recorder().samples, w.transitions(), &w.field().log, &w.summary())
            .map_err(|e| RunError::Output(e.to_string()))?;
    }
    Ok(RunReport {
        hash: w.hash(),
        ticks: w.tick(),
        summary: w.summary(),
        violations: w.violations(),
    })
}
