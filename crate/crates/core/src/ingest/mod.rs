//! Network ingest: shapefile geometry, dBASE attributes, the z-level table,
//! and synthetic network generators. Everything here produces a
//! [`RawNetwork`], the joined pre-topology form.

mod dbf;
mod shp;
mod synthetic;

pub use dbf::{parse_dbf, write_dbf, AttributeRecord, ColumnSpec, DbfTable, FieldDescriptor, FieldValue};
pub use shp::{parse_shp, write_shp, ShpData};
pub use synthetic::{generate_synthetic, SyntheticKind, SyntheticSpec};

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{BBox, PointXY};

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("shapefile shorter than its 100-byte header ({0} bytes)")]
    TruncatedHeader(usize),
    #[error("bad shapefile file code {0} (expected 9994)")]
    BadMagic(i32),
    #[error("unsupported shape type {0}")]
    UnsupportedShapeType(i32),
    #[error("record {record} is truncated")]
    TruncatedRecord { record: usize },
    #[error("record {record} is malformed: {reason}")]
    MalformedRecord { record: usize, reason: &'static str },
    #[error("record {record} has a non-finite coordinate")]
    NonFiniteCoordinate { record: usize },
    #[error("bad dbf header: {0}")]
    BadHeader(&'static str),
    #[error("dbf record size {declared} disagrees with field widths {fields}")]
    FieldOverflow { declared: usize, fields: usize },
    #[error("shapefile has {shp} records but the table has {dbf} rows")]
    CountMismatch { shp: usize, dbf: usize },
    #[error("required column `{column}` missing for logical field `{field}` in row {row}")]
    MissingRequiredColumn {
        field: &'static str,
        column: String,
        row: u32,
    },
    #[error("bad value for `{field}` in row {row}: {value}")]
    BadValue {
        field: &'static str,
        row: u32,
        value: String,
    },
    #[error("z-level table: {0}")]
    ZLevel(String),
    #[error("bad synthetic network spec: {0}")]
    BadSpec(String),
}

/// An open polyline, possibly multi-part. Parts are consecutive index ranges
/// covering `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub id: u32,
    pub parts: Vec<Range<usize>>,
    pub points: Vec<PointXY>,
}

impl Polyline {
    pub fn single(id: u32, points: Vec<PointXY>) -> Self {
        let n = points.len();
        Self {
            id,
            parts: vec![0..n],
            points,
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let mut expected = 0;
        for r in &self.parts {
            if r.start != expected {
                return Err("parts are not contiguous and ordered");
            }
            if r.end <= r.start || r.end - r.start < 2 {
                return Err("part with fewer than two points");
            }
            expected = r.end;
        }
        if expected != self.points.len() {
            return Err("parts do not cover the point list");
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err("non-finite coordinate");
        }
        Ok(())
    }

    pub fn part_points(&self, part: usize) -> &[PointXY] {
        &self.points[self.parts[part].clone()]
    }

    pub fn length(&self) -> f64 {
        (0..self.parts.len())
            .map(|k| crate::geom::polyline_length(self.part_points(k)))
            .sum()
    }

    /// Drop consecutive duplicate points inside each part. Parts that collapse
    /// to a single point are removed.
    pub fn dedup_consecutive(&mut self) {
        let mut points = Vec::with_capacity(self.points.len());
        let mut parts = Vec::with_capacity(self.parts.len());
        for r in &self.parts {
            let start = points.len();
            for p in &self.points[r.clone()] {
                if points.len() > start && points.last() == Some(p) {
                    continue;
                }
                points.push(*p);
            }
            if points.len() - start < 2 {
                points.truncate(start);
            } else {
                parts.push(start..points.len());
            }
        }
        self.points = points;
        self.parts = parts;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// From the first point toward the last.
    Forward,
    Backward,
    Both,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
            Direction::Both => Direction::Both,
        }
    }
}

/// The logical traffic attributes of one polyline after column mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadAttributes {
    /// Row ordinal in the source table.
    pub ordinal: u32,
    pub lanes_forward: u8,
    pub lanes_backward: u8,
    /// m/s
    pub speed_limit: f64,
    pub direction: Direction,
}

/// Explicit altitude levels keyed by (polyline id, point ordinal); absent
/// entries are level 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZLevelTable {
    pub levels: BTreeMap<(u32, u32), i32>,
}

impl ZLevelTable {
    pub fn level(&self, polyline: u32, ordinal: u32) -> i32 {
        self.levels.get(&(polyline, ordinal)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, polyline: u32, ordinal: u32, level: i32) {
        if level == 0 {
            self.levels.remove(&(polyline, ordinal));
        } else {
            self.levels.insert((polyline, ordinal), level);
        }
    }

    /// Parse `polyline_id,point_ordinal,level` CSV with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = ZLevelTable::default();
        for (i, row) in rdr.deserialize::<(u32, u32, i32)>().enumerate() {
            let (pl, ord, level) =
                row.map_err(|e| IngestError::ZLevel(format!("row {}: {e}", i + 1)))?;
            table.set(pl, ord, level);
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("polyline_id,point_ordinal,level\n");
        for ((pl, ord), lvl) in &self.levels {
            s.push_str(&format!("{pl},{ord},{lvl}\n"));
        }
        s
    }
}

/// Maps provider-specific column names onto logical fields, with defaults
/// used when a cell is missing or the column is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub lanes: Option<String>,
    /// Lanes in the backward direction; falls back to `lanes`.
    pub lanes_backward: Option<String>,
    pub speed: Option<String>,
    /// Multiplier applied to the speed column to get m/s (3.6 km/h -> 1/3.6).
    pub speed_factor: f64,
    pub direction: Option<String>,
    /// Column whose truthy value reverses the direction convention per record.
    pub flip: Option<String>,
    /// Direction codes (case-insensitive) recognized in the direction column.
    pub forward_codes: Vec<String>,
    pub backward_codes: Vec<String>,
    pub both_codes: Vec<String>,
    pub default_lanes: Option<u8>,
    pub default_speed: Option<f64>,
    pub default_direction: Option<Direction>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            lanes: Some("LANES".into()),
            lanes_backward: Some("LANES_BK".into()),
            speed: Some("SPEED".into()),
            speed_factor: 1.0,
            direction: Some("DIR".into()),
            flip: None,
            forward_codes: vec!["F".into()],
            backward_codes: vec!["T".into()],
            both_codes: vec!["B".into()],
            default_lanes: Some(1),
            default_speed: Some(13.9),
            default_direction: Some(Direction::Both),
        }
    }
}

impl ColumnMapping {
    fn lookup<'r>(rec: &'r AttributeRecord, col: &Option<String>) -> Option<&'r FieldValue> {
        col.as_ref()
            .and_then(|c| rec.values.get(c))
            .filter(|v| !matches!(v, FieldValue::Missing))
    }

    pub fn map_record(&self, rec: &AttributeRecord) -> Result<RoadAttributes, IngestError> {
        let row = rec.ordinal;
        let missing = |field: &'static str, col: &Option<String>| IngestError::MissingRequiredColumn {
            field,
            column: col.clone().unwrap_or_else(|| "<unmapped>".into()),
            row,
        };

        let lanes = match Self::lookup(rec, &self.lanes) {
            Some(v) => lane_value(v, row)?,
            None => self.default_lanes.ok_or_else(|| missing("lane_count", &self.lanes))?,
        };
        let lanes_backward = match Self::lookup(rec, &self.lanes_backward) {
            Some(v) => lane_value(v, row)?,
            None => lanes,
        };
        let speed = match Self::lookup(rec, &self.speed) {
            Some(v) => {
                let raw = v.as_f64().ok_or_else(|| IngestError::BadValue {
                    field: "speed_limit",
                    row,
                    value: format!("{v:?}"),
                })?;
                raw * self.speed_factor
            }
            None => self.default_speed.ok_or_else(|| missing("speed_limit", &self.speed))?,
        };
        if !(speed.is_finite() && speed > 0.0) {
            return Err(IngestError::BadValue {
                field: "speed_limit",
                row,
                value: speed.to_string(),
            });
        }
        let mut direction = match Self::lookup(rec, &self.direction) {
            Some(v) => {
                let code = match v {
                    FieldValue::Text(t) => t.trim().to_string(),
                    FieldValue::Number(n) => format!("{n}"),
                    FieldValue::Missing => unreachable!(),
                };
                let matches = |codes: &[String]| codes.iter().any(|c| c.eq_ignore_ascii_case(&code));
                if matches(&self.forward_codes) {
                    Direction::Forward
                } else if matches(&self.backward_codes) {
                    Direction::Backward
                } else if matches(&self.both_codes) {
                    Direction::Both
                } else {
                    return Err(IngestError::BadValue {
                        field: "direction",
                        row,
                        value: code,
                    });
                }
            }
            None => self
                .default_direction
                .ok_or_else(|| missing("direction", &self.direction))?,
        };
        if let Some(v) = Self::lookup(rec, &self.flip) {
            let truthy = match v {
                FieldValue::Number(n) => *n != 0.0,
                FieldValue::Text(t) => matches!(t.trim().to_ascii_uppercase().as_str(), "Y" | "T" | "1" | "TRUE" | "YES"),
                FieldValue::Missing => false,
            };
            if truthy {
                direction = direction.flipped();
            }
        }
        Ok(RoadAttributes {
            ordinal: row,
            lanes_forward: lanes,
            lanes_backward,
            speed_limit: speed,
            direction,
        })
    }
}

fn lane_value(v: &FieldValue, row: u32) -> Result<u8, IngestError> {
    match v.as_f64() {
        Some(n) if n >= 1.0 && n <= 254.0 && n.fract() == 0.0 => Ok(n as u8),
        _ => Err(IngestError::BadValue {
            field: "lane_count",
            row,
            value: format!("{v:?}"),
        }),
    }
}

/// Geometry joined with mapped attributes, before any topology is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNetwork {
    pub polylines: Vec<Polyline>,
    pub attributes: Vec<RoadAttributes>,
    pub zlevels: ZLevelTable,
    pub bbox: BBox,
    /// Coordinate unit tag; always "m" (projected planar meters).
    pub unit: String,
}

impl RawNetwork {
    pub fn new(polylines: Vec<Polyline>, attributes: Vec<RoadAttributes>, zlevels: ZLevelTable) -> Self {
        let bbox = BBox::from_points(polylines.iter().flat_map(|p| p.points.iter()));
        Self {
            polylines,
            attributes,
            zlevels,
            bbox,
            unit: "m".into(),
        }
    }

    pub fn point_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }

    /// Serialize to `.shp` + `.dbf` bytes using the default column mapping's
    /// column names.
    pub fn to_shapefile(&self) -> (Vec<u8>, Vec<u8>) {
        let shp = write_shp(&self.polylines);
        let cols = vec![
            ColumnSpec { name: "LANES".into(), kind: b'N', length: 4, decimals: 0 },
            ColumnSpec { name: "LANES_BK".into(), kind: b'N', length: 4, decimals: 0 },
            ColumnSpec { name: "SPEED".into(), kind: b'C', length: 24, decimals: 0 },
            ColumnSpec { name: "DIR".into(), kind: b'C', length: 1, decimals: 0 },
        ];
        let rows: Vec<Vec<FieldValue>> = self
            .attributes
            .iter()
            .map(|a| {
                vec![
                    FieldValue::Number(a.lanes_forward as f64),
                    FieldValue::Number(a.lanes_backward as f64),
                    // shortest round-trip representation keeps speeds exact
                    FieldValue::Text(format!("{:?}", a.speed_limit)),
                    FieldValue::Text(
                        match a.direction {
                            Direction::Forward => "F",
                            Direction::Backward => "T",
                            Direction::Both => "B",
                        }
                        .into(),
                    ),
                ]
            })
            .collect();
        (shp, write_dbf(&cols, &rows))
    }
}

/// Join `.shp` geometry, `.dbf` rows and the z-level table into a
/// [`RawNetwork`].
///
/// Records are matched by ordinal. Null shapes and deleted rows drop their
/// counterpart. Polylines are renumbered densely in record order; z-level
/// entries keyed by original record ordinal follow them.
pub fn load_network(
    shp_bytes: &[u8],
    dbf_bytes: &[u8],
    zlevels: Option<&ZLevelTable>,
    mapping: &ColumnMapping,
) -> Result<RawNetwork, IngestError> {
    let shp = parse_shp(shp_bytes)?;
    let table = parse_dbf(dbf_bytes)?;
    if shp.record_count != table.row_count {
        return Err(IngestError::CountMismatch {
            shp: shp.record_count,
            dbf: table.row_count,
        });
    }
    let rows: BTreeMap<u32, &AttributeRecord> = table.records.iter().map(|r| (r.ordinal, r)).collect();
    let empty = ZLevelTable::default();
    let zsrc = zlevels.unwrap_or(&empty);

    let mut polylines = Vec::new();
    let mut attributes = Vec::new();
    let mut z = ZLevelTable::default();
    for mut pl in shp.polylines {
        let Some(rec) = rows.get(&pl.id) else { continue };
        let attrs = mapping.map_record(rec)?;
        let source_id = pl.id;
        let new_id = polylines.len() as u32;
        // carry z-levels through the consecutive-duplicate cleanup
        let levels: Vec<i32> = (0..pl.points.len() as u32).map(|k| zsrc.level(source_id, k)).collect();
        let before = pl.points.clone();
        pl.dedup_consecutive();
        if pl.points.is_empty() {
            continue;
        }
        if pl.points.len() == before.len() {
            for (k, lvl) in levels.iter().enumerate() {
                z.set(new_id, k as u32, *lvl);
            }
        } else {
            let mut src = 0usize;
            for (k, p) in pl.points.iter().enumerate() {
                while before[src] != *p {
                    src += 1;
                }
                z.set(new_id, k as u32, levels[src]);
                src += 1;
            }
        }
        pl.id = new_id;
        polylines.push(pl);
        attributes.push(attrs);
    }
    Ok(RawNetwork::new(polylines, attributes, z))
}
