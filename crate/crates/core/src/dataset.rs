//! Tabular outputs: CSV and a JSON-lines mirror with a fixed float policy.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so they parse
//! back to the same bits; infinities are `inf`/`-inf`; NaN is rejected.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Float,
    Int,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [(&'static str, ColumnType)],
}

use ColumnType::{Float as F, Int as I, Text as T};

pub const CONTOUR: Schema = Schema { name: "contour", columns: &[("theta", F), ("pi", F)] };
pub const REGION: Schema = Schema { name: "region", columns: &[("alpha", F), ("lower", F), ("upper", F)] };
pub const VALIDITY: Schema = Schema { name: "validity", columns: &[("alpha", F), ("cdf", F), ("band", F)] };
pub const FALSE_CONFIDENCE: Schema =
    Schema { name: "false-confidence", columns: &[("alpha", F), ("assigner", T), ("cdf", F)] };
pub const EQUIVALENCE: Schema =
    Schema { name: "equivalence", columns: &[("u", F), ("hitting", F), ("contour", F), ("mc_se", F)] };
pub const COVERAGE: Schema = Schema {
    name: "coverage",
    columns: &[
        ("method", T),
        ("level", F),
        ("coverage", F),
        ("mean_length", F),
        ("unbounded_count", I),
        ("mc_se", F),
        ("reps", I),
        ("seed", I),
    ],
};
pub const REDUCTION: Schema = Schema { name: "reduction", columns: &[("y1", F), ("y2", F), ("h", F)] };
pub const FIDUCIAL: Schema = Schema { name: "fiducial", columns: &[("level", F), ("lower", F), ("upper", F)] };
pub const PROBABILITY: Schema = Schema { name: "probability", columns: &[("assertion", T), ("probability", F)] };
pub const TEST: Schema = Schema { name: "test", columns: &[("alpha", F), ("attained", F), ("decision", T)] };

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as u64)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

pub type Row = Vec<Value>;

pub fn format_float(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse::<f64>().map_err(|e| Error::Schema(format!("bad float '{s}': {e}"))),
    }
}

fn check_row(schema: &Schema, row: &Row, index: usize) -> Result<()> {
    if row.len() != schema.columns.len() {
        return Err(Error::Schema(format!(
            "{}: row {index} has {} fields, expected {}",
            schema.name,
            row.len(),
            schema.columns.len()
        )));
    }
    for ((col, ty), v) in schema.columns.iter().zip(row) {
        match (ty, v) {
            (ColumnType::Float, Value::Float(x)) if x.is_nan() => {
                return Err(Error::Schema(format!("{}: NaN in column '{col}' of row {index}", schema.name)))
            }
            (ColumnType::Float, Value::Float(_)) | (ColumnType::Int, Value::Int(_)) => {}
            (ColumnType::Text, Value::Text(s)) => {
                if s.contains([',', '\n', '\r', '"']) {
                    return Err(Error::Schema(format!("{}: text in column '{col}' needs quoting", schema.name)));
                }
            }
            _ => {
                return Err(Error::Schema(format!("{}: wrong type in column '{col}' of row {index}", schema.name)))
            }
        }
    }
    Ok(())
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Float(x) => format_float(*x),
        Value::Int(i) => i.to_string(),
        Value::Text(s) => s.clone(),
    }
}

fn value_json(v: &Value) -> String {
    match v {
        Value::Float(x) if x.is_finite() => format_float(*x),
        Value::Float(x) => serde_json::to_string(&format_float(*x)).expect("string"),
        Value::Int(i) => i.to_string(),
        Value::Text(s) => serde_json::to_string(s).expect("string"),
    }
}

/// Render rows in the given format after checking them against the schema.
pub fn render(rows: &[Row], schema: &Schema, format: Format) -> Result<String> {
    for (i, r) in rows.iter().enumerate() {
        check_row(schema, r, i)?;
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                let fields: Vec<String> = r.iter().map(value_text).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        Format::Jsonl => {
            for r in rows {
                out.push('{');
                for (k, ((col, _), v)) in schema.columns.iter().zip(r).enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "\"{col}\":{}", value_json(v));
                }
                out.push_str("}\n");
            }
        }
    }
    Ok(out)
}

/// Write a dataset atomically: temp file in the target directory, then rename.
pub fn emit_dataset(rows: &[Row], schema: &Schema, path: &Path, format: Format) -> Result<()> {
    let text = render(rows, schema, format)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

/// Parse CSV text produced by [`render`] back into typed rows.
pub fn parse_csv(text: &str, schema: &Schema) -> Result<Vec<Row>> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or_default();
    let expect: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
    if header != expect.join(",") {
        return Err(Error::Schema(format!("{}: header '{header}' does not match", schema.name)));
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != schema.columns.len() {
            return Err(Error::Schema(format!("{}: malformed line '{line}'", schema.name)));
        }
        let row = schema
            .columns
            .iter()
            .zip(fields)
            .map(|((_, ty), f)| match ty {
                ColumnType::Float => parse_float(f).map(Value::Float),
                ColumnType::Int => {
                    f.parse::<u64>().map(Value::Int).map_err(|e| Error::Schema(format!("bad integer '{f}': {e}")))
                }
                ColumnType::Text => Ok(Value::Text(f.to_string())),
            })
            .collect::<Result<Row>>()?;
        rows.push(row);
    }
    Ok(rows)
}
