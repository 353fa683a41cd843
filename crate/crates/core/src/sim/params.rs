use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Per-driver car-following and behavior parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverParams {
    /// m/s²
    pub a_max: f64,
    /// m/s²
    pub b_comfort: f64,
    /// Time headway, s.
    pub headway: f64,
    /// Standstill gap, m.
    pub s0: f64,
    pub delta: f64,
    /// Vehicle length, m.
    pub length: f64,
    /// Multiplier on speed limits.
    pub speed_compliance: f64,
    /// Probability of pushing into a crossroad without a free exit.
    pub blocker_tendency: f64,
    /// Stopped time tolerated before seeking alternatives, s.
    pub saturation_threshold: f64,
    /// Probability of ignoring an encumbrance advice.
    pub stubbornness: f64,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            a_max: 1.0,
            b_comfort: 1.5,
            headway: 1.5,
            s0: 2.0,
            delta: 4.0,
            length: 5.0,
            speed_compliance: 1.0,
            blocker_tendency: 0.05,
            saturation_threshold: 90.0,
            stubbornness: 0.2,
        }
    }
}

/// Normal distribution truncated to `[min, max]`; `sd == 0` is a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncNormal {
    pub mean: f64,
    #[serde(default)]
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl TruncNormal {
    pub const fn fixed(v: f64) -> Self {
        Self {
            mean: v,
            sd: 0.0,
            min: v,
            max: v,
        }
    }

    pub const fn new(mean: f64, sd: f64, min: f64, max: f64) -> Self {
        Self { mean, sd, min, max }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.mean.is_finite() && self.sd.is_finite() && self.sd >= 0.0 && self.min <= self.max) {
            return Err(format!("bad distribution {self:?}"));
        }
        if self.mean < self.min || self.mean > self.max {
            return Err(format!("mean outside [min, max] in {self:?}"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sd == 0.0 {
            return self.mean;
        }
        let n = Normal::new(self.mean, self.sd).expect("validated sd");
        for _ in 0..64 {
            let x = n.sample(rng);
            if x >= self.min && x <= self.max {
                return x;
            }
        }
        self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverDistributions {
    pub a_max: TruncNormal,
    pub b_comfort: TruncNormal,
    pub headway: TruncNormal,
    pub s0: TruncNormal,
    pub delta: TruncNormal,
    pub length: TruncNormal,
    pub speed_compliance: TruncNormal,
    pub blocker_tendency: TruncNormal,
    pub saturation_threshold: TruncNormal,
    pub stubbornness: TruncNormal,
}

impl Default for DriverDistributions {
    fn default() -> Self {
        Self {
            a_max: TruncNormal::new(1.0, 0.15, 0.6, 1.6),
            b_comfort: TruncNormal::new(1.5, 0.2, 1.0, 2.5),
            headway: TruncNormal::new(1.5, 0.2, 1.0, 2.2),
            s0: TruncNormal::new(2.0, 0.3, 1.2, 3.0),
            delta: TruncNormal::fixed(4.0),
            length: TruncNormal::new(5.0, 0.4, 4.0, 6.0),
            speed_compliance: TruncNormal::new(1.0, 0.08, 0.8, 1.2),
            blocker_tendency: TruncNormal::new(0.05, 0.05, 0.0, 1.0),
            saturation_threshold: TruncNormal::new(90.0, 25.0, 30.0, 240.0),
            stubbornness: TruncNormal::fixed(0.2),
        }
    }
}

impl DriverDistributions {
    /// Every driver gets exactly `p`.
    pub fn homogeneous(p: &DriverParams) -> Self {
        Self {
            a_max: TruncNormal::fixed(p.a_max),
            b_comfort: TruncNormal::fixed(p.b_comfort),
            headway: TruncNormal::fixed(p.headway),
            s0: TruncNormal::fixed(p.s0),
            delta: TruncNormal::fixed(p.delta),
            length: TruncNormal::fixed(p.length),
            speed_compliance: TruncNormal::fixed(p.speed_compliance),
            blocker_tendency: TruncNormal::fixed(p.blocker_tendency),
            saturation_threshold: TruncNormal::fixed(p.saturation_threshold),
            stubbornness: TruncNormal::fixed(p.stubbornness),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("a_max", self.a_max, 0.0),
            ("b_comfort", self.b_comfort, 0.0),
            ("headway", self.headway, 0.0),
            ("s0", self.s0, 0.0),
            ("delta", self.delta, 0.0),
            ("length", self.length, 0.0),
            ("speed_compliance", self.speed_compliance, 0.0),
            ("saturation_threshold", self.saturation_threshold, 0.0),
        ];
        for (name, d, floor) in all {
            d.validate().map_err(|e| format!("{name}: {e}"))?;
            if d.min <= floor {
                return Err(format!("{name}: minimum must be positive"));
            }
        }
        for (name, d) in [("blocker_tendency", self.blocker_tendency), ("stubbornness", self.stubbornness)] {
            d.validate().map_err(|e| format!("{name}: {e}"))?;
            if d.min < 0.0 || d.max > 1.0 {
                return Err(format!("{name}: must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> DriverParams {
        DriverParams {
            a_max: self.a_max.mean,
            b_comfort: self.b_comfort.mean,
            headway: self.headway.mean,
            s0: self.s0.mean,
            delta: self.delta.mean,
            length: self.length.mean,
            speed_compliance: self.speed_compliance.mean,
            blocker_tendency: self.blocker_tendency.mean,
            saturation_threshold: self.saturation_threshold.mean,
            stubbornness: self.stubbornness.mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DriverParams {
        DriverParams {
            a_max: self.a_max.sample(rng),
            b_comfort: self.b_comfort.sample(rng),
            headway: self.headway.sample(rng),
            s0: self.s0.sample(rng),
            delta: self.delta.sample(rng),
            length: self.length.sample(rng),
            speed_compliance: self.speed_compliance.sample(rng),
            blocker_tendency: self.blocker_tendency.sample(rng),
            saturation_threshold: self.saturation_threshold.sample(rng),
            stubbornness: self.stubbornness.sample(rng),
        }
    }
}

/// Microsimulation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Time step, s.
    pub dt: f64,
    /// Bias toward the rightmost lane on entry.
    pub right_bias: f64,
    /// Acceleration advantage needed to change lanes, m/s².
    pub lane_change_threshold: f64,
    /// Minimum time between two lane changes of one vehicle, s.
    pub lane_change_cooldown: f64,
    /// Distance before the edge end where turn lanes are enforced, m.
    pub turn_zone: f64,
    /// No lane changes this close to the edge start, m.
    pub no_change_start: f64,
    /// Slack added to the stopping distance when deciding at crossroads, m.
    pub decision_margin: f64,
    /// Below this speed a vehicle counts as stopped, m/s.
    pub stop_speed: f64,
    /// Safety margin kept by the position guard, m.
    pub guard_eps: f64,
    /// Workers for the perceive phase; results do not depend on it.
    pub workers: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.5,
            right_bias: 0.6,
            lane_change_threshold: 0.2,
            lane_change_cooldown: 5.0,
            turn_zone: 50.0,
            no_change_start: 30.0,
            decision_margin: 10.0,
            stop_speed: 0.5,
            guard_eps: 0.05,
            workers: 1,
        }
    }
}
