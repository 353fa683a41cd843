//! The agent decision layer: trip generation, jam escape, crisis behaviors
//! and the belief/desire/intention bookkeeping that switches between them.

mod choice;
mod crisis;
mod od;
mod state;

pub use choice::{chicken_next_edge, local_next_edge, planar_next_edge, Candidate};
pub use crisis::{draw_mode, on_crisis, validate_mixture, CrisisEvent, Mixture};
pub use od::{normalized_radii, OdPreset, OdSampler, OdScenario, RadialWeight};
pub use state::{
    BehaviorParams, BehaviorState, CrisisBelief, Horizon, Mode, RecentEdges, SpectatorClass, Transition,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("no feasible origin/destination pair")]
    NoFeasiblePair,
    #[error("no reachable candidate around vertex {vertex}")]
    NoCandidate { vertex: u32 },
}

/// Per-tick belief and intention maintenance. Returns the mode change it
/// made, if any, with its reason. Returning to `Normal` clears annoyance so
/// the agent does not fall straight back into escaping.
pub fn bdi_update(s: &mut BehaviorState, v: f64, dt: f64, p: &BehaviorParams) -> Option<(Mode, Mode, &'static str)> {
    if v < p.stop_speed {
        s.annoyance += dt;
    } else {
        s.annoyance = (s.annoyance - p.annoyance_decay * dt).max(0.0);
    }
    let from = s.mode;
    if from == Mode::Normal {
        if s.is_annoyed() {
            s.set_mode(Mode::JamEscape);
            return Some((from, Mode::JamEscape, "saturated"));
        }
        return None;
    }
    if s.annoyance - s.annoyance_at_mode_entry <= p.patience {
        return None;
    }
    let to = match from {
        Mode::Roadrunner => Mode::Wandering,
        Mode::Sheep => Mode::Roadrunner,
        Mode::JamEscape => {
            s.annoyance = 0.0;
            s.jam_trigger = None;
            Mode::Normal
        }
        Mode::Chicken | Mode::Spectator | Mode::Pragmatic => {
            s.saturation_threshold *= p.patience_growth;
            s.annoyance_at_mode_entry = s.annoyance;
            return None;
        }
        Mode::Wandering | Mode::Normal => return None,
    };
    s.set_mode(to);
    Some((from, to, "impatient"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st() -> BehaviorState {
        BehaviorState::new(90.0, 0.2, 8)
    }

    #[test]
    fn annoyance_integrates_and_decays() {
        let p = BehaviorParams::default();
        let mut s = st();
        for _ in 0..100 {
            bdi_update(&mut s, 0.0, 0.5, &p);
        }
        assert_eq!(s.annoyance, 50.0);
        for _ in 0..200 {
            bdi_update(&mut s, 10.0, 0.5, &p);
        }
        assert_eq!(s.annoyance, 0.0);
    }

    #[test]
    fn saturation_triggers_escape() {
        let p = BehaviorParams::default();
        let mut s = st();
        let mut switched = None;
        for k in 0..240 {
            if let Some(t) = bdi_update(&mut s, 0.0, 0.5, &p) {
                switched = Some((k, t));
                break;
            }
        }
        let (k, t) = switched.unwrap();
        assert_eq!(t, (Mode::Normal, Mode::JamEscape, "saturated"));
        assert_eq!(k, 179);
    }

    #[test]
    fn impatience_table() {
        let p = BehaviorParams::default();
        for (from, to) in [(Mode::Roadrunner, Some(Mode::Wandering)), (Mode::Sheep, Some(Mode::Roadrunner)), (Mode::Chicken, None)] {
            let mut s = st();
            s.set_mode(from);
            let mut got = None;
            for _ in 0..122 {
                if let Some(t) = bdi_update(&mut s, 0.0, 0.5, &p) {
                    got = Some(t.1);
                }
            }
            assert_eq!(got, to, "{from:?}");
            if from == Mode::Chicken {
                assert_eq!(s.saturation_threshold, 135.0);
            }
        }
    }

    #[test]
    fn recent_ring_is_bounded() {
        let mut r = RecentEdges::new(8);
        for e in 0..20 {
            r.push(e);
        }
        assert_eq!(r.len(), 8);
        assert!(!r.contains(11));
        assert!(r.contains(12));
    }
}
