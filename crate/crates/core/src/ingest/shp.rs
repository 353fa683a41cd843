//! Reader and writer for the polyline subset of the ESRI `.shp` format.
//!
//! Only Null (0), PolyLine (3) and PolyLineZ (13) shapes are understood. Z and
//! M arrays of PolyLineZ records are skipped; altitude comes from the z-level
//! table instead.

use super::{IngestError, Polyline};
use crate::geom::{BBox, PointXY};

pub const FILE_CODE: i32 = 9994;
pub const VERSION: i32 = 1000;
pub const SHAPE_NULL: i32 = 0;
pub const SHAPE_POLYLINE: i32 = 3;
pub const SHAPE_POLYLINE_Z: i32 = 13;

const HEADER_LEN: usize = 100;
const RECORD_HEADER_LEN: usize = 8;

/// Parsed `.shp` content.
#[derive(Debug, Clone, PartialEq)]
pub struct ShpData {
    /// Non-null polylines; `Polyline::id` is the 0-based record ordinal.
    pub polylines: Vec<Polyline>,
    /// Header bounding box.
    pub bbox: BBox,
    /// Number of records in the file, null records included.
    pub record_count: usize,
}

fn be_i32(b: &[u8], at: usize) -> i32 {
    i32::from_be_bytes(b[at..at + 4].try_into().unwrap())
}

fn le_i32(b: &[u8], at: usize) -> i32 {
    i32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn le_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn parse_shp(bytes: &[u8]) -> Result<ShpData, IngestError> {
    if bytes.len() < HEADER_LEN {
        return Err(IngestError::TruncatedHeader(bytes.len()));
    }
    let code = be_i32(bytes, 0);
    if code != FILE_CODE {
        return Err(IngestError::BadMagic(code));
    }
    let declared = be_i32(bytes, 24);
    if declared < 50 {
        return Err(IngestError::TruncatedHeader(bytes.len()));
    }
    let file_len = declared as usize * 2;
    if file_len > bytes.len() {
        return Err(IngestError::TruncatedRecord { record: 0 });
    }
    let shape_type = le_i32(bytes, 32);
    if !matches!(shape_type, SHAPE_NULL | SHAPE_POLYLINE | SHAPE_POLYLINE_Z) {
        return Err(IngestError::UnsupportedShapeType(shape_type));
    }
    let bbox = BBox {
        min_x: le_f64(bytes, 36),
        min_y: le_f64(bytes, 44),
        max_x: le_f64(bytes, 52),
        max_y: le_f64(bytes, 60),
    };

    let mut polylines = Vec::new();
    let mut offset = HEADER_LEN;
    let mut record = 0usize;
    while offset < file_len {
        if offset + RECORD_HEADER_LEN > file_len {
            return Err(IngestError::TruncatedRecord { record });
        }
        let words = be_i32(bytes, offset + 4);
        if words < 2 {
            return Err(IngestError::TruncatedRecord { record });
        }
        let content_len = words as usize * 2;
        let start = offset + RECORD_HEADER_LEN;
        let end = start + content_len;
        if end > file_len {
            return Err(IngestError::TruncatedRecord { record });
        }
        let content = &bytes[start..end];
        match le_i32(content, 0) {
            SHAPE_NULL => {}
            SHAPE_POLYLINE | SHAPE_POLYLINE_Z => {
                polylines.push(parse_polyline(content, record)?);
            }
            other => return Err(IngestError::UnsupportedShapeType(other)),
        }
        offset = end;
        record += 1;
    }
    Ok(ShpData {
        polylines,
        bbox,
        record_count: record,
    })
}

fn parse_polyline(content: &[u8], record: usize) -> Result<Polyline, IngestError> {
    // type(4) + box(32) + NumParts(4) + NumPoints(4)
    if content.len() < 44 {
        return Err(IngestError::TruncatedRecord { record });
    }
    let num_parts = le_i32(content, 36);
    let num_points = le_i32(content, 40);
    if num_parts < 1 || num_points < 0 {
        return Err(IngestError::MalformedRecord {
            record,
            reason: "part or point count out of range",
        });
    }
    let (np, npts) = (num_parts as usize, num_points as usize);
    let parts_end = 44usize
        .checked_add(np.checked_mul(4).ok_or(IngestError::TruncatedRecord { record })?)
        .ok_or(IngestError::TruncatedRecord { record })?;
    let points_end = parts_end
        .checked_add(npts.checked_mul(16).ok_or(IngestError::TruncatedRecord { record })?)
        .ok_or(IngestError::TruncatedRecord { record })?;
    if points_end > content.len() {
        return Err(IngestError::TruncatedRecord { record });
    }
    let mut starts = Vec::with_capacity(np);
    for k in 0..np {
        let s = le_i32(content, 44 + 4 * k);
        if s < 0 {
            return Err(IngestError::MalformedRecord {
                record,
                reason: "negative part index",
            });
        }
        starts.push(s as usize);
    }
    let mut points = Vec::with_capacity(npts);
    for k in 0..npts {
        let at = parts_end + 16 * k;
        let p = PointXY::new(le_f64(content, at), le_f64(content, at + 8));
        if !p.is_finite() {
            return Err(IngestError::NonFiniteCoordinate { record });
        }
        points.push(p);
    }
    let mut parts = Vec::with_capacity(np);
    for k in 0..np {
        let end = if k + 1 < np { starts[k + 1] } else { npts };
        parts.push(starts[k]..end);
    }
    let pl = Polyline {
        id: record as u32,
        parts,
        points,
    };
    pl.validate().map_err(|reason| IngestError::MalformedRecord { record, reason })?;
    Ok(pl)
}

/// Serialize polylines as a PolyLine (type 3) `.shp` file. Record numbers
/// follow slice order; the bounding box covers every point.
pub fn write_shp(polylines: &[Polyline]) -> Vec<u8> {
    let bbox = BBox::from_points(polylines.iter().flat_map(|p| p.points.iter()));
    let bbox = if bbox.is_empty() {
        BBox {
            min_x: 0.0,
            min_y: 0.0,
            max_x: 0.0,
            max_y: 0.0,
        }
    } else {
        bbox
    };
    let mut out = vec![0u8; HEADER_LEN];
    out[0..4].copy_from_slice(&FILE_CODE.to_be_bytes());
    out[28..32].copy_from_slice(&VERSION.to_le_bytes());
    out[32..36].copy_from_slice(&SHAPE_POLYLINE.to_le_bytes());
    for (k, v) in [bbox.min_x, bbox.min_y, bbox.max_x, bbox.max_y].iter().enumerate() {
        out[36 + 8 * k..44 + 8 * k].copy_from_slice(&v.to_le_bytes());
    }
    for (i, pl) in polylines.iter().enumerate() {
        let b = BBox::from_points(pl.points.iter());
        let content_len = 44 + 4 * pl.parts.len() + 16 * pl.points.len();
        out.extend_from_slice(&(i as i32 + 1).to_be_bytes());
        out.extend_from_slice(&((content_len / 2) as i32).to_be_bytes());
        out.extend_from_slice(&SHAPE_POLYLINE.to_le_bytes());
        for v in [b.min_x, b.min_y, b.max_x, b.max_y] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(pl.parts.len() as i32).to_le_bytes());
        out.extend_from_slice(&(pl.points.len() as i32).to_le_bytes());
        for r in &pl.parts {
            out.extend_from_slice(&(r.start as i32).to_le_bytes());
        }
        for p in &pl.points {
            out.extend_from_slice(&p.x.to_le_bytes());
            out.extend_from_slice(&p.y.to_le_bytes());
        }
    }
    let words = (out.len() / 2) as i32;
    out[24..28].copy_from_slice(&words.to_be_bytes());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One PolyLine record, one part, points (0,0) and (10,0), laid out by
    /// hand from the format tables rather than through `write_shp`.
    fn golden_one_record() -> Vec<u8> {
        let mut b = Vec::new();
        // main header
        b.extend_from_slice(&[0x00, 0x00, 0x27, 0x0A]); // 9994 BE
        b.extend_from_slice(&[0u8; 20]);
        // file length: 100 header + 8 record header + 80 content = 188 bytes = 94 words
        b.extend_from_slice(&[0x00, 0x00, 0x00, 0x5E]);
        b.extend_from_slice(&[0xE8, 0x03, 0x00, 0x00]); // 1000 LE
        b.extend_from_slice(&[0x03, 0x00, 0x00, 0x00]); // PolyLine
        for v in [0.0f64, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(b.len(), 100);
        // record header: number 1, content 80 bytes = 40 words
        b.extend_from_slice(&[0, 0, 0, 1, 0, 0, 0, 0x28]);
        b.extend_from_slice(&[0x03, 0, 0, 0]);
        for v in [0.0f64, 0.0, 10.0, 0.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&[1, 0, 0, 0]); // NumParts
        b.extend_from_slice(&[2, 0, 0, 0]); // NumPoints
        b.extend_from_slice(&[0, 0, 0, 0]); // Parts[0]
        for v in [0.0f64, 0.0, 10.0, 0.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn golden_file_parses() {
        let data = parse_shp(&golden_one_record()).unwrap();
        assert_eq!(data.record_count, 1);
        assert_eq!(data.polylines.len(), 1);
        let pl = &data.polylines[0];
        assert_eq!(pl.points, vec![PointXY::new(0.0, 0.0), PointXY::new(10.0, 0.0)]);
        assert_eq!(pl.parts, vec![0..2]);
        assert_eq!(
            data.bbox,
            BBox { min_x: 0.0, min_y: 0.0, max_x: 10.0, max_y: 0.0 }
        );
    }

    #[test]
    fn writer_matches_golden_bytes() {
        let pl = Polyline {
            id: 0,
            parts: vec![0..2],
            points: vec![PointXY::new(0.0, 0.0), PointXY::new(10.0, 0.0)],
        };
        assert_eq!(write_shp(&[pl]), golden_one_record());
    }

    #[test]
    fn bad_magic() {
        let mut b = golden_one_record();
        b[3] = 0x0B;
        assert!(matches!(parse_shp(&b), Err(IngestError::BadMagic(9995))));
    }

    #[test]
    fn unsupported_header_type() {
        let mut b = golden_one_record();
        b[32] = 5; // polygon
        assert!(matches!(parse_shp(&b), Err(IngestError::UnsupportedShapeType(5))));
    }

    #[test]
    fn null_only_file() {
        let mut b = golden_one_record()[..100].to_vec();
        b.extend_from_slice(&[0, 0, 0, 1, 0, 0, 0, 2]);
        b.extend_from_slice(&[0, 0, 0, 0]);
        let words = (b.len() / 2) as i32;
        b[24..28].copy_from_slice(&words.to_be_bytes());
        let data = parse_shp(&b).unwrap();
        assert!(data.polylines.is_empty());
        assert_eq!(data.record_count, 1);
    }

    #[test]
    fn polyline_z_drops_z_and_m() {
        let mut content = Vec::new();
        content.extend_from_slice(&SHAPE_POLYLINE_Z.to_le_bytes());
        for v in [0.0f64, 0.0, 3.0, 4.0] {
            content.extend_from_slice(&v.to_le_bytes());
        }
        content.extend_from_slice(&1i32.to_le_bytes());
        content.extend_from_slice(&2i32.to_le_bytes());
        content.extend_from_slice(&0i32.to_le_bytes());
        for v in [0.0f64, 0.0, 3.0, 4.0] {
            content.extend_from_slice(&v.to_le_bytes());
        }
        // Z range + Z array + M range + M array
        for v in [1.0f64, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0] {
            content.extend_from_slice(&v.to_le_bytes());
        }
        let mut b = golden_one_record()[..100].to_vec();
        b[32..36].copy_from_slice(&SHAPE_POLYLINE_Z.to_le_bytes());
        b.extend_from_slice(&1i32.to_be_bytes());
        b.extend_from_slice(&((content.len() / 2) as i32).to_be_bytes());
        b.extend_from_slice(&content);
        let words = (b.len() / 2) as i32;
        b[24..28].copy_from_slice(&words.to_be_bytes());
        let data = parse_shp(&b).unwrap();
        assert_eq!(data.polylines[0].points[1], PointXY::new(3.0, 4.0));
    }

    #[test]
    fn every_truncation_is_an_error() {
        let full = golden_one_record();
        for cut in 0..full.len() {
            assert!(parse_shp(&full[..cut]).is_err(), "cut at {cut} accepted");
        }
        // declared length rewritten to match the cut, so the record walk
        // itself has to notice
        for cut in (102..full.len()).step_by(2) {
            let mut b = full[..cut].to_vec();
            b[24..28].copy_from_slice(&((cut / 2) as i32).to_be_bytes());
            assert!(parse_shp(&b).is_err(), "consistent cut at {cut} accepted");
        }
    }
}
