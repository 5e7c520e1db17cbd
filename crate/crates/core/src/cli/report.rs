//! Tabular output with a metadata header, as CSV or JSON.
//!
//! CSV layout: `# key=value` metadata lines, then `# summary.key=value`
//! lines, then the column header and the rows. Floats are written with 17
//! significant digits (`{:.16e}`), so parsing them back gives the same bits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u8> for Cell {
    fn from(x: u8) -> Self {
        Cell::Int(x.into())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x.into())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Int(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Float(x) => Number::from_f64(*x).map(Value::Number).unwrap_or_else(|| Value::String(x.to_string())),
            Cell::Int(x) => Value::from(*x),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(x) => Some(*x as f64),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn sum(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write_to<W: Write>(&self, format: Format, mut out: W) -> std::io::Result<()> {
        out.write_all(self.render(format).as_bytes())?;
        out.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        for (k, v) in &self.summary {
            s.push_str(&format!("# summary.{k}={v}\n"));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), Value::Object(metadata));
        root.insert("columns".into(), Value::from(self.columns.clone()));
        root.insert("rows".into(), Value::Array(rows));
        root.insert("summary".into(), Value::Object(summary));
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("plain JSON values");
        text.push('\n');
        text
    }
}

/// Reads the CSV form back: metadata, summary (as text) and float rows.
/// Cells that are not numbers become NaN.
pub fn parse_csv(text: &str) -> (Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>) {
    let mut meta = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.to_string(), v.to_string()));
            }
        } else if columns.is_empty() {
            columns = line.split(',').map(String::from).collect();
        } else if !line.is_empty() {
            rows.push(line.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect());
        }
    }
    (meta, columns, rows)
}
