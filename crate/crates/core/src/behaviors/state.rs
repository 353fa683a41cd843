use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geom::PointXY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Normal,
    JamEscape,
    Chicken,
    Spectator,
    Pragmatic,
    Wandering,
    Roadrunner,
    Sheep,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Normal,
        Mode::JamEscape,
        Mode::Chicken,
        Mode::Spectator,
        Mode::Pragmatic,
        Mode::Wandering,
        Mode::Roadrunner,
        Mode::Sheep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::JamEscape => "jam_escape",
            Mode::Chicken => "chicken",
            Mode::Spectator => "spectator",
            Mode::Pragmatic => "pragmatic",
            Mode::Wandering => "wandering",
            Mode::Roadrunner => "roadrunner",
            Mode::Sheep => "sheep",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Modes that drive toward a destination vertex.
    pub fn has_destination(self) -> bool {
        matches!(self, Mode::Normal | Mode::JamEscape | Mode::Pragmatic | Mode::Spectator)
    }
}

/// What an agent knows about a crisis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrisisBelief {
    pub position: PointXY,
    pub cause: String,
    pub learn_tick: u64,
}

/// Bounded memory of recently used edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecentEdges {
    cap: usize,
    items: VecDeque<u32>,
}

impl RecentEdges {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            items: VecDeque::with_capacity(cap),
        }
    }

    pub fn push(&mut self, e: u32) {
        if self.cap == 0 {
            return;
        }
        if self.items.len() == self.cap {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn contains(&self, e: u32) -> bool {
        self.items.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &u32> {
        self.items.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BehaviorState {
    pub mode: Mode,
    pub crisis: Option<CrisisBelief>,
    pub recent_edges: RecentEdges,
    /// Accumulated stopped time, s.
    pub annoyance: f64,
    pub annoyance_at_mode_entry: f64,
    /// Pending destinations, next first.
    pub desires: VecDeque<u32>,
    pub saturation_threshold: f64,
    pub stubbornness: f64,
    /// Where a jam escape started.
    pub jam_trigger: Option<PointXY>,
    /// Reached its spectator spot and stays.
    pub parked: bool,
}

impl BehaviorState {
    pub fn new(saturation_threshold: f64, stubbornness: f64, recent_cap: usize) -> Self {
        Self {
            mode: Mode::Normal,
            crisis: None,
            recent_edges: RecentEdges::new(recent_cap),
            annoyance: 0.0,
            annoyance_at_mode_entry: 0.0,
            desires: VecDeque::new(),
            saturation_threshold,
            stubbornness,
            jam_trigger: None,
            parked: false,
        }
    }

    pub fn is_annoyed(&self) -> bool {
        self.annoyance >= self.saturation_threshold
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
        self.annoyance_at_mode_entry = self.annoyance;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectatorClass {
    /// Head for the vertex nearest the event through the tables.
    Global,
    /// Steer hop by hop toward the event's bearing.
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    Hops { limit: u32 },
    Euclidean { limit: f64 },
}

/// Agent-layer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorParams {
    /// Below this speed stopped time accumulates, m/s.
    pub stop_speed: f64,
    /// Annoyance lost per second of motion.
    pub annoyance_decay: f64,
    /// Distance from the jam after which an escaping agent resumes, m.
    pub resume_distance: f64,
    pub recent_edges: usize,
    /// Extra annoyance tolerated in a mode before switching, s.
    pub patience: f64,
    /// Saturation multiplier when an agent keeps its crisis mode.
    pub patience_growth: f64,
    /// Entry-flow window used by followers of the crowd, s.
    pub flow_window: f64,
    pub spectator_class: SpectatorClass,
    pub planar_horizon: Horizon,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            stop_speed: 0.5,
            annoyance_decay: 0.5,
            resume_distance: 500.0,
            recent_edges: 8,
            patience: 60.0,
            patience_growth: 1.5,
            flow_window: 60.0,
            spectator_class: SpectatorClass::Global,
            planar_horizon: Horizon::Hops { limit: 2 },
        }
    }
}

/// A logged mode change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub tick: u64,
    pub agent: u32,
    pub from: Mode,
    pub to: Mode,
    pub reason: &'static str,
}
