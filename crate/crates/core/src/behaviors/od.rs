use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BehaviorError;
use crate::geom::{BBox, PointXY};

/// Piecewise-linear weight over normalized distance to the center, given as
/// `(r, weight)` knots with increasing `r` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadialWeight(pub Vec<(f64, f64)>);

impl RadialWeight {
    pub fn constant() -> Self {
        Self(vec![(0.0, 1.0), (1.0, 1.0)])
    }

    pub fn rising() -> Self {
        Self(vec![(0.0, 0.1), (1.0, 1.0)])
    }

    pub fn falling() -> Self {
        Self(vec![(0.0, 1.0), (1.0, 0.1)])
    }

    pub fn at(&self, r: f64) -> f64 {
        let k = &self.0;
        if r <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((r0, w0), (r1, w1)) = (w[0], w[1]);
            if r <= r1 {
                let t = if r1 > r0 { (r - r0) / (r1 - r0) } else { 1.0 };
                return w0 + t * (w1 - w0);
            }
        }
        k[k.len() - 1].1
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.0.is_empty() {
            return Err("radial weight needs at least one knot".into());
        }
        if self.0.iter().any(|&(r, w)| !(r.is_finite() && w.is_finite() && w >= 0.0)) {
            return Err("radial weights must be finite and non-negative".into());
        }
        if self.0.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err("radial knots must be sorted by distance".into());
        }
        if self.0.iter().all(|&(_, w)| w == 0.0) {
            return Err("radial weight is identically zero".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdPreset {
    Uniform,
    /// Trips start near the border and end near the center.
    MorningInbound,
    EveningOutbound,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdScenario {
    pub preset: OdPreset,
    /// Defaults to the network's bounding-box center.
    #[serde(default)]
    pub center: Option<PointXY>,
    /// Custom radial source weights.
    #[serde(default)]
    pub source: Option<RadialWeight>,
    #[serde(default)]
    pub sink: Option<RadialWeight>,
    /// Explicit per-vertex `(vertex, weight)` source weights; unlisted
    /// vertices weigh 0. Overrides the radial form.
    #[serde(default)]
    pub source_vertices: Option<Vec<(u32, f64)>>,
    #[serde(default)]
    pub sink_vertices: Option<Vec<(u32, f64)>>,
}

impl Default for OdScenario {
    fn default() -> Self {
        Self::preset(OdPreset::Uniform)
    }
}

impl OdScenario {
    pub fn preset(preset: OdPreset) -> Self {
        Self {
            preset,
            center: None,
            source: None,
            sink: None,
            source_vertices: None,
            sink_vertices: None,
        }
    }

    /// Every trip from `origin` to `destination`.
    pub fn fixed(origin: u32, destination: u32) -> Self {
        Self {
            source_vertices: Some(vec![(origin, 1.0)]),
            sink_vertices: Some(vec![(destination, 1.0)]),
            ..Self::preset(OdPreset::Custom)
        }
    }

    pub fn radial_weights(&self) -> (RadialWeight, RadialWeight) {
        let (s, t) = match self.preset {
            OdPreset::Uniform => (RadialWeight::constant(), RadialWeight::constant()),
            OdPreset::MorningInbound => (RadialWeight::rising(), RadialWeight::falling()),
            OdPreset::EveningOutbound => (RadialWeight::falling(), RadialWeight::rising()),
            OdPreset::Custom => (RadialWeight::constant(), RadialWeight::constant()),
        };
        (self.source.clone().unwrap_or(s), self.sink.clone().unwrap_or(t))
    }

    pub fn validate(&self, vertex_count: usize) -> Result<(), String> {
        let (s, t) = self.radial_weights();
        s.validate()?;
        t.validate()?;
        for list in [&self.source_vertices, &self.sink_vertices].into_iter().flatten() {
            if list.iter().any(|&(v, w)| v as usize >= vertex_count || !(w.is_finite() && w >= 0.0)) {
                return Err("per-vertex weights reference unknown vertices or are negative".into());
            }
            if list.iter().all(|&(_, w)| w == 0.0) {
                return Err("per-vertex weights are identically zero".into());
            }
        }
        Ok(())
    }
}

/// Precomputed origin and destination distributions over vertices.
#[derive(Debug, Clone)]
pub struct OdSampler {
    pub source_weights: Vec<f64>,
    pub sink_weights: Vec<f64>,
    source: Option<WeightedIndex<f64>>,
    sink: Option<WeightedIndex<f64>>,
}

/// Distance of each vertex to `center`, divided by the largest one.
pub fn normalized_radii(positions: &[PointXY], center: PointXY) -> Vec<f64> {
    let d: Vec<f64> = positions.iter().map(|p| p.dist(&center)).collect();
    let max = d.iter().cloned().fold(0.0, f64::max);
    d.iter().map(|x| if max > 0.0 { x / max } else { 0.0 }).collect()
}

impl OdSampler {
    pub fn new(sc: &OdScenario, positions: &[PointXY]) -> Self {
        let center = sc.center.unwrap_or_else(|| BBox::from_points(positions.iter()).center());
        let radii = normalized_radii(positions, center);
        let (rs, rt) = sc.radial_weights();
        let explicit = |list: &Option<Vec<(u32, f64)>>, radial: &RadialWeight| match list {
            Some(l) => {
                let mut w = vec![0.0; positions.len()];
                for &(v, x) in l {
                    w[v as usize] += x;
                }
                w
            }
            None => radii.iter().map(|&r| radial.at(r)).collect(),
        };
        let source_weights = explicit(&sc.source_vertices, &rs);
        let sink_weights = explicit(&sc.sink_vertices, &rt);
        Self {
            source: WeightedIndex::new(&source_weights).ok(),
            sink: WeightedIndex::new(&sink_weights).ok(),
            source_weights,
            sink_weights,
        }
    }

    /// Draw an origin/destination pair, redrawing identical or unreachable
    /// pairs up to 100 times.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        reachable: impl Fn(u32, u32) -> bool,
    ) -> Result<(u32, u32), BehaviorError> {
        let (Some(src), Some(dst)) = (&self.source, &self.sink) else {
            return Err(BehaviorError::NoFeasiblePair);
        };
        if self.source_weights.len() < 2 {
            return Err(BehaviorError::NoFeasiblePair);
        }
        for _ in 0..=100 {
            let o = src.sample(rng) as u32;
            let d = dst.sample(rng) as u32;
            if o != d && reachable(o, d) {
                return Ok((o, d));
            }
        }
        Err(BehaviorError::NoFeasiblePair)
    }
}
