use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::Value;

/// Key holding wall-clock time. Always written on its own line so golden
/// comparisons can drop it.
pub const TIMING_KEY: &str = "elapsed_seconds";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            Cell::Empty => None,
        }
    }

    fn csv(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(v),
            Cell::Empty => String::new(),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Cell::Int(v) => s.serialize_i64(v),
            Cell::Float(v) if v.is_finite() => s.serialize_f64(v),
            _ => s.serialize_none(),
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table of named columns plus a metadata block echoing the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub command: String,
    pub metadata: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub elapsed_seconds: f64,
}

impl FigureTable {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn metadata_value(&self, key: &str) -> Option<&Value> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        self.column_index(column).and_then(|i| self.rows[row][i].as_f64())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# command={}", self.command)?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={}", meta_text(v))?;
        }
        writeln!(out, "# {TIMING_KEY}={:.6}", self.elapsed_seconds)?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

struct Row<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(c, v)?;
        }
        map.end()
    }
}

struct Meta<'a>(&'a [(String, Value)]);

impl Serialize for Meta<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for FigureTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("command", &self.command)?;
        map.serialize_entry("metadata", &Meta(&self.metadata))?;
        map.serialize_entry(TIMING_KEY, &self.elapsed_seconds)?;
        map.serialize_entry("columns", &self.columns)?;
        let rows: Vec<Row> = self
            .rows
            .iter()
            .map(|cells| Row {
                columns: &self.columns,
                cells,
            })
            .collect();
        map.serialize_entry("rows", &rows)?;
        map.end()
    }
}

fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.to_string(),
            None => format_float(n.as_f64().unwrap_or(f64::NAN)),
        },
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FigureTable {
        let mut t = FigureTable::new("demo", &["n", "ratio", "expected"]);
        t.meta("field", 1e-8);
        t.meta("n_max", 20);
        t.meta("state", "2,1,1");
        t.push(vec![Cell::Int(2), Cell::Float(-0.1), Cell::Empty]);
        t.elapsed_seconds = 0.25;
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command=demo");
        assert_eq!(lines[1], "# field=1.0000000000000000e-8");
        assert_eq!(lines[2], "# n_max=20");
        assert_eq!(lines[3], "# state=2,1,1");
        assert_eq!(lines[4], "# elapsed_seconds=0.250000");
        assert_eq!(lines[5], "n,ratio,expected");
        assert_eq!(lines[6], "2,-1.0000000000000001e-1,");
    }

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.1, -8.271348640090974, 1e-300, 4.998305858155571] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_layout() {
        let text = sample().to_json().unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "demo");
        assert_eq!(v["metadata"]["n_max"], 20);
        assert_eq!(v["rows"][0]["n"], 2);
        assert!(v["rows"][0]["expected"].is_null());
        let timing: Vec<&str> = text.lines().filter(|l| l.contains(TIMING_KEY)).collect();
        assert_eq!(timing.len(), 1);
    }
}
