//! Synthetic desk-scale networks: Manhattan grids, radial cities and closed
//! ring roads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Direction, IngestError, Polyline, RawNetwork, RoadAttributes, ZLevelTable};
use crate::geom::PointXY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SyntheticKind {
    /// `rows` x `cols` intersections joined by two-way streets.
    Grid { rows: u32, cols: u32 },
    /// A center, `rings` concentric rings and `spokes` radial avenues.
    Radial { rings: u32, spokes: u32 },
    /// A closed one-way loop of `segments` straight edges whose total length
    /// is `circumference`; `edge_length` is ignored.
    Ring { segments: u32, circumference: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub shape: SyntheticKind,
    /// Block length (grid) or ring spacing (radial), meters.
    #[serde(default = "default_edge_length")]
    pub edge_length: f64,
    #[serde(default = "default_lanes")]
    pub lanes: u8,
    /// m/s
    #[serde(default = "default_speed")]
    pub speed: f64,
    /// Uniform positional jitter of grid/radial intersections, meters.
    #[serde(default)]
    pub jitter: f64,
}

fn default_edge_length() -> f64 {
    100.0
}
fn default_lanes() -> u8 {
    1
}
fn default_speed() -> f64 {
    13.9
}

impl SyntheticSpec {
    pub fn grid(rows: u32, cols: u32, edge_length: f64) -> Self {
        Self {
            shape: SyntheticKind::Grid { rows, cols },
            edge_length,
            lanes: 1,
            speed: 13.9,
            jitter: 0.0,
        }
    }

    pub fn radial(rings: u32, spokes: u32, edge_length: f64) -> Self {
        Self {
            shape: SyntheticKind::Radial { rings, spokes },
            edge_length,
            lanes: 1,
            speed: 13.9,
            jitter: 0.0,
        }
    }

    pub fn ring(segments: u32, circumference: f64) -> Self {
        Self {
            shape: SyntheticKind::Ring { segments, circumference },
            edge_length: circumference / segments.max(1) as f64,
            lanes: 1,
            speed: 13.9,
            jitter: 0.0,
        }
    }

    pub fn with_lanes(mut self, lanes: u8) -> Self {
        self.lanes = lanes;
        self
    }

    pub fn with_speed(mut self, speed: f64) -> Self {
        self.speed = speed;
        self
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<RawNetwork, IngestError> {
    let bad = |m: &str| Err(IngestError::BadSpec(m.to_string()));
    if !(spec.edge_length.is_finite() && spec.edge_length > 0.0) {
        return bad("edge_length must be positive");
    }
    if spec.lanes == 0 {
        return bad("lanes must be at least 1");
    }
    if !(spec.speed.is_finite() && spec.speed > 0.0) {
        return bad("speed must be positive");
    }
    if !(spec.jitter.is_finite() && spec.jitter >= 0.0 && spec.jitter < 0.25 * spec.edge_length) {
        return bad("jitter must be in [0, edge_length/4)");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jit = |p: PointXY| {
        if spec.jitter == 0.0 {
            p
        } else {
            PointXY::new(
                p.x + rng.random_range(-spec.jitter..spec.jitter),
                p.y + rng.random_range(-spec.jitter..spec.jitter),
            )
        }
    };
    let mut lines: Vec<(Vec<PointXY>, Direction)> = Vec::new();
    match spec.shape {
        SyntheticKind::Grid { rows, cols } => {
            if rows < 2 || cols < 2 {
                return bad("grid needs at least 2x2 intersections");
            }
            let l = spec.edge_length;
            let nodes: Vec<Vec<PointXY>> = (0..rows)
                .map(|r| (0..cols).map(|c| jit(PointXY::new(c as f64 * l, r as f64 * l))).collect())
                .collect();
            for r in 0..rows as usize {
                for c in 0..cols as usize - 1 {
                    lines.push((vec![nodes[r][c], nodes[r][c + 1]], Direction::Both));
                }
            }
            for c in 0..cols as usize {
                for r in 0..rows as usize - 1 {
                    lines.push((vec![nodes[r][c], nodes[r + 1][c]], Direction::Both));
                }
            }
        }
        SyntheticKind::Radial { rings, spokes } => {
            if rings < 1 || spokes < 3 {
                return bad("radial needs at least 1 ring and 3 spokes");
            }
            let center = PointXY::new(0.0, 0.0);
            let nodes: Vec<Vec<PointXY>> = (1..=rings)
                .map(|k| {
                    (0..spokes)
                        .map(|j| {
                            let a = 2.0 * PI * j as f64 / spokes as f64;
                            let r = k as f64 * spec.edge_length;
                            jit(PointXY::new(r * a.cos(), r * a.sin()))
                        })
                        .collect()
                })
                .collect();
            for j in 0..spokes as usize {
                lines.push((vec![center, nodes[0][j]], Direction::Both));
                for k in 1..rings as usize {
                    lines.push((vec![nodes[k - 1][j], nodes[k][j]], Direction::Both));
                }
            }
            // ring arcs carry interior shape points
            const ARC_STEPS: usize = 4;
            for (k, ring) in nodes.iter().enumerate() {
                let r = (k + 1) as f64 * spec.edge_length;
                for j in 0..spokes as usize {
                    let a0 = 2.0 * PI * j as f64 / spokes as f64;
                    let a1 = 2.0 * PI * (j + 1) as f64 / spokes as f64;
                    let mut pts = vec![ring[j]];
                    for s in 1..ARC_STEPS {
                        let a = a0 + (a1 - a0) * s as f64 / ARC_STEPS as f64;
                        pts.push(PointXY::new(r * a.cos(), r * a.sin()));
                    }
                    pts.push(ring[(j + 1) % spokes as usize]);
                    lines.push((pts, Direction::Both));
                }
            }
        }
        SyntheticKind::Ring { segments, circumference } => {
            if segments < 3 {
                return bad("ring needs at least 3 segments");
            }
            if !(circumference.is_finite() && circumference > 0.0) {
                return bad("circumference must be positive");
            }
            let n = segments as f64;
            let radius = circumference / (2.0 * n * (PI / n).sin());
            let pts: Vec<PointXY> = (0..segments)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / n;
                    PointXY::new(radius * a.cos(), radius * a.sin())
                })
                .collect();
            for j in 0..segments as usize {
                lines.push((vec![pts[j], pts[(j + 1) % segments as usize]], Direction::Forward));
            }
        }
    }

    let polylines = lines
        .iter()
        .enumerate()
        .map(|(i, (pts, _))| Polyline::single(i as u32, pts.clone()))
        .collect();
    let attributes = lines
        .iter()
        .enumerate()
        .map(|(i, (_, dir))| RoadAttributes {
            ordinal: i as u32,
            lanes_forward: spec.lanes,
            lanes_backward: spec.lanes,
            speed_limit: spec.speed,
            direction: *dir,
        })
        .collect();
    Ok(RawNetwork::new(polylines, attributes, ZLevelTable::default()))
}
