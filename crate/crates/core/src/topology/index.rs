use serde::Serialize;

use super::quadtree::QuadTree;
use crate::geom::PointXY;
use crate::ingest::RawNetwork;

/// One occurrence of a point in a polyline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Incidence {
    pub polyline: u32,
    /// Ordinal within the polyline's full point list.
    pub ordinal: u32,
    /// Whether the point starts or ends one of the polyline's parts.
    pub endpoint: bool,
}

impl Incidence {
    /// Line segments meeting at this occurrence.
    pub fn segments(&self) -> u32 {
        if self.endpoint {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexEntry {
    /// Position of the first incidence that created the entry.
    pub position: PointXY,
    pub z: i32,
    pub incidences: Vec<Incidence>,
}

impl IndexEntry {
    /// Number of line segments meeting at the point.
    pub fn multiplicity(&self) -> u32 {
        self.incidences.iter().map(Incidence::segments).sum()
    }
}

/// Coincidence-merged points of a raw network.
///
/// Entries are created in polyline/point order; a point joins the
/// lowest-numbered existing entry whose representative lies within `eps`
/// and has the same z-level, otherwise it founds a new entry.
#[derive(Debug, Clone, Serialize)]
pub struct PointIndex {
    pub eps: f64,
    pub entries: Vec<IndexEntry>,
    /// `entry_of[polyline][ordinal]`
    pub entry_of: Vec<Vec<u32>>,
}

/// The coincidence predicate used throughout topology building.
pub fn coincident(a: &PointXY, b: &PointXY, eps: f64) -> bool {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy <= eps * eps
}

pub fn build_point_index(raw: &RawNetwork, eps: f64) -> PointIndex {
    assert!(eps > 0.0, "coincidence tolerance must be positive");
    let mut qt = QuadTree::new(raw.bbox);
    let mut entries: Vec<IndexEntry> = Vec::new();
    let mut entry_of = Vec::with_capacity(raw.polylines.len());
    for pl in &raw.polylines {
        let mut ids = Vec::with_capacity(pl.points.len());
        let is_end: Vec<bool> = {
            let mut v = vec![false; pl.points.len()];
            for r in &pl.parts {
                v[r.start] = true;
                v[r.end - 1] = true;
            }
            v
        };
        for (k, p) in pl.points.iter().enumerate() {
            let z = raw.zlevels.level(pl.id, k as u32);
            let mut best: Option<u32> = None;
            qt.for_each_within(p, eps, |_, e| {
                if entries[e as usize].z == z && best.is_none_or(|b| e < b) {
                    best = Some(e);
                }
            });
            let inc = Incidence {
                polyline: pl.id,
                ordinal: k as u32,
                endpoint: is_end[k],
            };
            let id = match best {
                Some(e) => {
                    entries[e as usize].incidences.push(inc);
                    e
                }
                None => {
                    let e = entries.len() as u32;
                    entries.push(IndexEntry {
                        position: *p,
                        z,
                        incidences: vec![inc],
                    });
                    qt.insert(*p, e);
                    e
                }
            };
            ids.push(id);
        }
        entry_of.push(ids);
    }
    PointIndex {
        eps,
        entries,
        entry_of,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointClass {
    Vertex,
    ShapePoint,
}

/// Per-entry vertex / shape-point decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: Vec<PointClass>,
}

impl Classification {
    pub fn is_vertex(&self, entry: u32) -> bool {
        self.class[entry as usize] == PointClass::Vertex
    }

    pub fn vertex_count(&self) -> usize {
        self.class.iter().filter(|c| **c == PointClass::Vertex).count()
    }
}

/// Multiplicity 2 made of one interior incidence is a shape point; every
/// other configuration (dead ends, junctions of two polyline ends, and all
/// points where three or more segments meet) is a vertex.
pub fn classify_entry(entry: &IndexEntry) -> PointClass {
    match entry.multiplicity() {
        2 if entry.incidences.len() == 1 => PointClass::ShapePoint,
        _ => PointClass::Vertex,
    }
}

pub fn classify_points(index: &PointIndex) -> Classification {
    Classification {
        class: index.entries.iter().map(classify_entry).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Direction, Polyline, RoadAttributes, ZLevelTable};

    pub(crate) fn raw_from(lines: Vec<Vec<(f64, f64)>>, z: ZLevelTable) -> RawNetwork {
        let pls: Vec<Polyline> = lines
            .into_iter()
            .enumerate()
            .map(|(i, pts)| Polyline::single(i as u32, pts.into_iter().map(|(x, y)| PointXY::new(x, y)).collect()))
            .collect();
        let attrs = (0..pls.len())
            .map(|i| RoadAttributes {
                ordinal: i as u32,
                lanes_forward: 1,
                lanes_backward: 1,
                speed_limit: 10.0,
                direction: Direction::Both,
            })
            .collect();
        RawNetwork::new(pls, attrs, z)
    }

    #[test]
    fn three_ends_share_one_entry() {
        let raw = raw_from(
            vec![
                vec![(0.0, 0.0), (5.0, 5.0)],
                vec![(10.0, 0.0), (5.0, 5.0)],
                vec![(5.0, 5.0), (5.0, 10.0)],
            ],
            ZLevelTable::default(),
        );
        let idx = build_point_index(&raw, 0.01);
        let center = idx.entry_of[0][1];
        assert_eq!(idx.entry_of[1][1], center);
        assert_eq!(idx.entry_of[2][0], center);
        assert_eq!(idx.entries[center as usize].multiplicity(), 3);
        assert_eq!(idx.entries.len(), 4);
    }

    #[test]
    fn z_levels_keep_crossings_apart() {
        let mut z = ZLevelTable::default();
        z.set(1, 1, 1);
        let raw = raw_from(
            vec![
                vec![(0.0, 5.0), (5.0, 5.0), (10.0, 5.0)],
                vec![(5.0, 0.0), (5.0, 5.0), (5.0, 10.0)],
            ],
            z,
        );
        let idx = build_point_index(&raw, 0.01);
        assert_ne!(idx.entry_of[0][1], idx.entry_of[1][1]);
        let c = classify_points(&idx);
        assert_eq!(c.class[idx.entry_of[0][1] as usize], PointClass::ShapePoint);
        assert_eq!(c.class[idx.entry_of[1][1] as usize], PointClass::ShapePoint);
    }

    #[test]
    fn classification_rules() {
        let raw = raw_from(
            vec![
                vec![(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)],
                vec![(10.0, 0.0), (20.0, 0.0)],
            ],
            ZLevelTable::default(),
        );
        let idx = build_point_index(&raw, 0.01);
        let c = classify_points(&idx);
        // interior of one polyline
        assert!(!c.is_vertex(idx.entry_of[0][1]));
        // isolated end
        assert!(c.is_vertex(idx.entry_of[0][0]));
        assert_eq!(idx.entries[idx.entry_of[0][0] as usize].multiplicity(), 1);
        // end shared by two polylines
        assert!(c.is_vertex(idx.entry_of[0][2]));
        assert_eq!(idx.entries[idx.entry_of[0][2] as usize].multiplicity(), 2);
    }

    #[test]
    fn tolerance_merges_near_points() {
        let raw = raw_from(
            vec![vec![(0.0, 0.0), (5.0, 0.0)], vec![(5.005, 0.0), (9.0, 0.0)]],
            ZLevelTable::default(),
        );
        let idx = build_point_index(&raw, 0.01);
        assert_eq!(idx.entry_of[0][1], idx.entry_of[1][0]);
        let idx = build_point_index(&raw, 0.001);
        assert_ne!(idx.entry_of[0][1], idx.entry_of[1][0]);
    }
}
