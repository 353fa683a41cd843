//! dBASE III attribute tables (`.dbf`), the subset shapefiles use.

use std::collections::BTreeMap;

use super::IngestError;

const DELETED: u8 = 0x2A;
const LIVE: u8 = 0x20;
const TERMINATOR: u8 = 0x0D;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDescriptor {
    pub name: String,
    pub kind: u8,
    pub length: u8,
    pub decimals: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Text(String),
    Number(f64),
    Missing,
}

impl FieldValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FieldValue::Number(v) => Some(*v),
            FieldValue::Text(t) => t.trim().parse().ok(),
            FieldValue::Missing => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            FieldValue::Text(t) => Some(t),
            _ => None,
        }
    }
}

/// One live row of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRecord {
    /// Row ordinal in the file, deleted rows included.
    pub ordinal: u32,
    pub values: BTreeMap<String, FieldValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbfTable {
    pub fields: Vec<FieldDescriptor>,
    pub records: Vec<AttributeRecord>,
    /// Row count declared in the header (deleted rows included).
    pub row_count: usize,
}

pub fn parse_dbf(bytes: &[u8]) -> Result<DbfTable, IngestError> {
    if bytes.len() < 33 {
        return Err(IngestError::BadHeader("shorter than one header block"));
    }
    let row_count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let header_size = u16::from_le_bytes(bytes[8..10].try_into().unwrap()) as usize;
    let record_size = u16::from_le_bytes(bytes[10..12].try_into().unwrap()) as usize;
    if header_size > bytes.len() || header_size < 33 {
        return Err(IngestError::BadHeader("header size out of range"));
    }

    let mut fields = Vec::new();
    let mut at = 32;
    loop {
        if at >= header_size {
            return Err(IngestError::BadHeader("missing field terminator"));
        }
        if bytes[at] == TERMINATOR {
            break;
        }
        if at + 32 > header_size {
            return Err(IngestError::BadHeader("truncated field descriptor"));
        }
        let d = &bytes[at..at + 32];
        let name_end = d[..11].iter().position(|&c| c == 0).unwrap_or(11);
        let name = String::from_utf8_lossy(&d[..name_end]).trim().to_string();
        fields.push(FieldDescriptor {
            name,
            kind: d[11],
            length: d[16],
            decimals: d[17],
        });
        at += 32;
    }

    let widths: usize = fields.iter().map(|f| f.length as usize).sum();
    if widths + 1 != record_size {
        return Err(IngestError::FieldOverflow {
            declared: record_size,
            fields: widths + 1,
        });
    }
    let needed = header_size + row_count * record_size;
    if bytes.len() < needed {
        return Err(IngestError::BadHeader("fewer row bytes than declared"));
    }

    let mut records = Vec::with_capacity(row_count);
    for row in 0..row_count {
        let start = header_size + row * record_size;
        let raw = &bytes[start..start + record_size];
        match raw[0] {
            DELETED => continue,
            LIVE => {}
            _ => return Err(IngestError::BadHeader("unknown deletion flag")),
        }
        let mut values = BTreeMap::new();
        let mut off = 1;
        for f in &fields {
            let cell = &raw[off..off + f.length as usize];
            off += f.length as usize;
            values.insert(f.name.clone(), decode_cell(f.kind, cell));
        }
        records.push(AttributeRecord {
            ordinal: row as u32,
            values,
        });
    }
    Ok(DbfTable {
        fields,
        records,
        row_count,
    })
}

fn decode_cell(kind: u8, cell: &[u8]) -> FieldValue {
    let text = String::from_utf8_lossy(cell);
    let trimmed = text.trim_matches(|c: char| c == ' ' || c == '\0');
    match kind {
        b'N' | b'F' => {
            if trimmed.is_empty() {
                FieldValue::Missing
            } else {
                trimmed
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(FieldValue::Number)
                    .unwrap_or(FieldValue::Missing)
            }
        }
        _ => FieldValue::Text(trimmed.to_string()),
    }
}

/// Column spec for [`write_dbf`].
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: u8,
    pub length: u8,
    pub decimals: u8,
}

/// Serialize rows (all live) as a dBASE III table. Numbers are right-aligned,
/// text left-aligned; values wider than the column are truncated.
pub fn write_dbf(columns: &[ColumnSpec], rows: &[Vec<FieldValue>]) -> Vec<u8> {
    let header_size = 32 + 32 * columns.len() + 1;
    let record_size = 1 + columns.iter().map(|c| c.length as usize).sum::<usize>();
    let mut out = vec![0u8; 32];
    out[0] = 0x03;
    out[1] = 124; // last update yy mm dd, fixed for byte-stable output
    out[2] = 1;
    out[3] = 1;
    out[4..8].copy_from_slice(&(rows.len() as u32).to_le_bytes());
    out[8..10].copy_from_slice(&(header_size as u16).to_le_bytes());
    out[10..12].copy_from_slice(&(record_size as u16).to_le_bytes());
    for c in columns {
        let mut d = [0u8; 32];
        let name = c.name.as_bytes();
        let n = name.len().min(10);
        d[..n].copy_from_slice(&name[..n]);
        d[11] = c.kind;
        d[16] = c.length;
        d[17] = c.decimals;
        out.extend_from_slice(&d);
    }
    out.push(TERMINATOR);
    for row in rows {
        out.push(LIVE);
        for (c, v) in columns.iter().zip(row) {
            let w = c.length as usize;
            let s = match v {
                FieldValue::Missing => String::new(),
                FieldValue::Text(t) => t.clone(),
                FieldValue::Number(x) => {
                    if c.decimals > 0 {
                        format!("{:.*}", c.decimals as usize, x)
                    } else {
                        format!("{x}")
                    }
                }
            };
            let mut cell = s.into_bytes();
            cell.truncate(w);
            let pad = w - cell.len();
            if matches!(v, FieldValue::Number(_)) {
                out.extend(std::iter::repeat_n(b' ', pad));
                out.extend_from_slice(&cell);
            } else {
                out.extend_from_slice(&cell);
                out.extend(std::iter::repeat_n(b' ', pad));
            }
        }
    }
    out.push(0x1A);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn columns() -> Vec<ColumnSpec> {
        vec![
            ColumnSpec { name: "LANES".into(), kind: b'N', length: 4, decimals: 0 },
            ColumnSpec { name: "SPEED".into(), kind: b'N', length: 8, decimals: 1 },
            ColumnSpec { name: "DIR".into(), kind: b'C', length: 1, decimals: 0 },
        ]
    }

    #[test]
    fn simple_row() {
        let bytes = write_dbf(
            &columns(),
            &[vec![
                FieldValue::Number(2.0),
                FieldValue::Number(13.9),
                FieldValue::Text("B".into()),
            ]],
        );
        let t = parse_dbf(&bytes).unwrap();
        assert_eq!(t.records.len(), 1);
        let r = &t.records[0];
        assert_eq!(r.values["LANES"], FieldValue::Number(2.0));
        assert_eq!(r.values["SPEED"], FieldValue::Number(13.9));
        assert_eq!(r.values["DIR"], FieldValue::Text("B".into()));
    }

    #[test]
    fn deleted_rows_are_skipped() {
        let rows = vec![
            vec![FieldValue::Number(1.0), FieldValue::Number(10.0), FieldValue::Text("F".into())],
            vec![FieldValue::Number(2.0), FieldValue::Number(20.0), FieldValue::Text("B".into())],
        ];
        let mut bytes = write_dbf(&columns(), &rows);
        let header = 32 + 32 * 3 + 1;
        bytes[header] = DELETED;
        let t = parse_dbf(&bytes).unwrap();
        assert_eq!(t.row_count, 2);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].ordinal, 1);
    }

    #[test]
    fn blank_numeric_is_missing() {
        let bytes = write_dbf(
            &columns(),
            &[vec![FieldValue::Number(1.0), FieldValue::Missing, FieldValue::Text("F".into())]],
        );
        let t = parse_dbf(&bytes).unwrap();
        assert_eq!(t.records[0].values["SPEED"], FieldValue::Missing);
    }

    #[test]
    fn record_size_mismatch() {
        let mut bytes = write_dbf(&columns(), &[]);
        bytes[10] += 1;
        assert!(matches!(parse_dbf(&bytes), Err(IngestError::FieldOverflow { .. })));
    }

    #[test]
    fn missing_terminator() {
        let mut bytes = write_dbf(&columns(), &[]);
        let header = 32 + 32 * 3;
        bytes[header] = b'X';
        assert!(matches!(parse_dbf(&bytes), Err(IngestError::BadHeader(_))));
    }
}
