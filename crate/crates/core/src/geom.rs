//! Planar geometry primitives shared by every layer of the simulator.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A projected planar coordinate, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointXY {
    pub x: f64,
    pub y: f64,
}

impl PointXY {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &PointXY) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` toward `other`, radians in (-pi, pi].
    pub fn bearing_to(&self, other: &PointXY) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn lerp(&self, other: &PointXY, t: f64) -> PointXY {
        PointXY::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub const EMPTY: BBox = BBox {
        min_x: f64::INFINITY,
        min_y: f64::INFINITY,
        max_x: f64::NEG_INFINITY,
        max_y: f64::NEG_INFINITY,
    };

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a PointXY>) -> BBox {
        let mut b = BBox::EMPTY;
        for p in pts {
            b.extend(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min_x > self.max_x || self.min_y > self.max_y
    }

    pub fn extend(&mut self, p: &PointXY) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn contains(&self, p: &PointXY, slack: f64) -> bool {
        p.x >= self.min_x - slack
            && p.x <= self.max_x + slack
            && p.y >= self.min_y - slack
            && p.y <= self.max_y + slack
    }

    pub fn center(&self) -> PointXY {
        PointXY::new(
            0.5 * (self.min_x + self.max_x),
            0.5 * (self.min_y + self.max_y),
        )
    }
}

/// Unsigned angle between two bearings, in [0, pi].
pub fn angle_between(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d = 2.0 * PI - d;
    }
    d
}

/// Angle at `apex` between the rays toward `p` and `q`, in [0, pi].
pub fn apex_angle(apex: &PointXY, p: &PointXY, q: &PointXY) -> f64 {
    angle_between(apex.bearing_to(p), apex.bearing_to(q))
}

/// Polar angle normalized to [0, 2pi), east = 0, counterclockwise.
pub fn polar_angle(dx: f64, dy: f64) -> f64 {
    dy.atan2(dx).rem_euclid(2.0 * PI)
}

pub fn polyline_length(points: &[PointXY]) -> f64 {
    points.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

/// Point at arc distance `s` along a polyline, together with the local heading.
pub fn point_along(points: &[PointXY], s: f64) -> (PointXY, f64) {
    debug_assert!(points.len() >= 2);
    let mut remaining = s.max(0.0);
    for w in points.windows(2) {
        let seg = w[0].dist(&w[1]);
        if remaining <= seg || seg == 0.0 {
            let t = if seg > 0.0 { remaining / seg } else { 0.0 };
            return (w[0].lerp(&w[1], t.min(1.0)), w[0].bearing_to(&w[1]));
        }
        remaining -= seg;
    }
    let n = points.len();
    (points[n - 1], points[n - 2].bearing_to(&points[n - 1]))
}

/// Indices of points lying on the convex hull boundary, collinear boundary
/// points included (within `tol` meters of a hull edge).
pub fn hull_boundary(points: &[PointXY], tol: f64) -> Vec<bool> {
    let n = points.len();
    let mut on = vec![false; n];
    if n <= 3 {
        on.iter_mut().for_each(|b| *b = true);
        return on;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    let cross = |o: &PointXY, a: &PointXY, b: &PointXY| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * n);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(
                    &points[hull[hull.len() - 2]],
                    &points[hull[hull.len() - 1]],
                    &points[i],
                ) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    let m = hull.len();
    for (i, p) in points.iter().enumerate() {
        for k in 0..m {
            let a = &points[hull[k]];
            let b = &points[hull[(k + 1) % m]];
            if seg_dist(p, a, b) <= tol {
                on[i] = true;
                break;
            }
        }
    }
    on
}

fn seg_dist(p: &PointXY, a: &PointXY, b: &PointXY) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(&PointXY::new(a.x + t * dx, a.y + t * dy))
}
