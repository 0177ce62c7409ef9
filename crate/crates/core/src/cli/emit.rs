//! CSV and JSON writers for sweep rows, plus readers for the same formats.
//!
//! Finite floats are written with 17 significant digits so they read back
//! bit for bit. Non-finite values are written as `+inf`, `-inf` and `nan`
//! (strings in JSON).

use std::io::{self, Read, Write};

use serde_json::{json, Map, Value};

use crate::cli::sweep::{SweepRow, COLUMNS, NUMERIC_COLUMNS, VARIANT_COLUMN};
use crate::liouville::Variant;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "+inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "nan" => Some(f64::NAN),
        "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

/// Finite values become JSON numbers; the rest become sentinel strings.
pub fn float_value(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format_float(x)),
    }
}

fn value_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_float(s),
        _ => None,
    }
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn record(row: &SweepRow) -> Vec<String> {
    let numeric = row.numeric();
    let mut out: Vec<String> = numeric[..VARIANT_COLUMN].iter().map(|&x| format_float(x)).collect();
    out.push(row.variant.tag().to_string());
    out.extend(numeric[VARIANT_COLUMN..].iter().map(|&x| format_float(x)));
    out.push(row.status.clone());
    out
}

/// Recovers the underlying I/O error so its kind survives.
pub(crate) fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => invalid(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_io)?;
    for row in rows {
        w.write_record(record(row)).map_err(csv_io)?;
    }
    w.flush()
}

pub fn row_json(row: &SweepRow) -> Value {
    let numeric = row.numeric();
    let mut map = Map::new();
    let mut k = 0;
    for (i, name) in COLUMNS.iter().enumerate() {
        let v = match i {
            VARIANT_COLUMN => Value::String(row.variant.tag().to_string()),
            i if i == COLUMNS.len() - 1 => Value::String(row.status.clone()),
            _ => {
                k += 1;
                float_value(numeric[k - 1])
            }
        };
        map.insert((*name).to_string(), v);
    }
    Value::Object(map)
}

pub fn sweep_document(rows: &[SweepRow], config: &Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
    })
}

pub fn write_json<W: Write>(rows: &[SweepRow], config: &Value, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &sweep_document(rows, config))?;
    writeln!(out)
}

/// Writes `rows` in the chosen format; `config` is echoed in JSON only.
pub fn emit<W: Write>(rows: &[SweepRow], format: Format, config: &Value, out: W) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no rows to write"));
    }
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, config, out),
    }
}

fn parse_variant(s: &str) -> io::Result<Variant> {
    s.parse().map_err(|e: crate::Error| invalid(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> io::Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(invalid(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut numeric = [0.0; NUMERIC_COLUMNS];
        let mut k = 0;
        for (i, field) in rec.iter().enumerate() {
            if i == VARIANT_COLUMN || i == COLUMNS.len() - 1 {
                continue;
            }
            numeric[k] = parse_float(field).ok_or_else(|| invalid(format!("bad number `{field}` in {}", COLUMNS[i])))?;
            k += 1;
        }
        let variant = parse_variant(&rec[VARIANT_COLUMN])?;
        rows.push(SweepRow::from_numeric(numeric, variant, rec[COLUMNS.len() - 1].to_string()));
    }
    Ok(rows)
}

/// Returns the echoed configuration and the rows.
pub fn read_json<R: Read>(input: R) -> io::Result<(Value, Vec<SweepRow>)> {
    let doc: Value = serde_json::from_reader(input)?;
    if doc.get("schema_version").and_then(Value::as_str) != Some(SCHEMA_VERSION) {
        return Err(invalid("missing or unsupported schema_version"));
    }
    let config = doc.get("config").cloned().unwrap_or(Value::Null);
    let items = doc.get("rows").and_then(Value::as_array).ok_or_else(|| invalid("missing rows"))?;
    let mut rows = Vec::with_capacity(items.len());
    for item in items {
        let field = |name: &str| item.get(name).ok_or_else(|| invalid(format!("row lacks `{name}`")));
        let mut numeric = [0.0; NUMERIC_COLUMNS];
        let mut k = 0;
        for (i, name) in COLUMNS.iter().enumerate() {
            if i == VARIANT_COLUMN || i == COLUMNS.len() - 1 {
                continue;
            }
            numeric[k] = value_float(field(name)?).ok_or_else(|| invalid(format!("bad number in `{name}`")))?;
            k += 1;
        }
        let variant = parse_variant(field("variant")?.as_str().ok_or_else(|| invalid("variant is not a string"))?)?;
        let status = field("status")?.as_str().ok_or_else(|| invalid("status is not a string"))?.to_string();
        rows.push(SweepRow::from_numeric(numeric, variant, status));
    }
    Ok((config, rows))
}
