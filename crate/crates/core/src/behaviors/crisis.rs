use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::Mode;
use crate::geom::PointXY;

/// Mode probabilities; must sum to 1.
pub type Mixture = BTreeMap<Mode, f64>;

pub fn validate_mixture(m: &Mixture) -> Result<(), String> {
    if m.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err("mixture probabilities must be non-negative".into());
    }
    let total: f64 = m.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("mixture sums to {total}, not 1"));
    }
    if m.contains_key(&Mode::JamEscape) {
        return Err("jam_escape is not a crisis behavior".into());
    }
    Ok(())
}

/// Sample a mode; iteration follows `Mode` order so draws are stable.
pub fn draw_mode<R: Rng + ?Sized>(m: &Mixture, rng: &mut R) -> Mode {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = Mode::Normal;
    for (&mode, &p) in m {
        acc += p;
        last = mode;
        if u < acc {
            return mode;
        }
    }
    last
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrisisEvent {
    pub position: PointXY,
    /// Buffer radius, m.
    pub radius: f64,
    pub start_tick: u64,
    pub intensity: f64,
    pub inside: Mixture,
    pub outside: Mixture,
}

impl CrisisEvent {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err("radius must be positive".into());
        }
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return Err("intensity must lie in (0, 1]".into());
        }
        if !self.position.is_finite() {
            return Err("position must be finite".into());
        }
        validate_mixture(&self.inside).map_err(|e| format!("inside mixture: {e}"))?;
        validate_mixture(&self.outside).map_err(|e| format!("outside mixture: {e}"))
    }

    pub fn contains(&self, p: &PointXY) -> bool {
        self.position.dist(p) <= self.radius
    }
}

/// Mode an agent switches to on learning of `event`, or `None` to keep its
/// current one. Inside the buffer a share equal to the intensity reacts.
pub fn on_crisis<R: Rng + ?Sized>(event: &CrisisEvent, position: &PointXY, rng: &mut R) -> Option<Mode> {
    if event.contains(position) {
        let u: f64 = rng.random();
        if u < event.intensity {
            Some(draw_mode(&event.inside, rng))
        } else {
            None
        }
    } else {
        Some(draw_mode(&event.outside, rng))
    }
}
