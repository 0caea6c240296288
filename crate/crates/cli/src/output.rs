use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A rectangular result with named columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub format: Format,
    /// Four decimals instead of round-trip precision.
    pub paper_rounding: bool,
}

fn text(c: &Cell, rounding: bool) -> String {
    match c {
        Cell::Num(v) if rounding => format!("{v:.4}"),
        Cell::Num(v) => format!("{v}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn value(c: &Cell, rounding: bool) -> Value {
    match c {
        Cell::Num(v) if rounding => json!((v * 1e4).round() / 1e4),
        Cell::Num(v) => json!(v),
        Cell::Int(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

fn write_csv(t: &Table, rounding: bool, w: impl Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(&t.headers)?;
    for row in &t.rows {
        out.write_record(row.iter().map(|c| text(c, rounding)))?;
    }
    out.flush()?;
    Ok(())
}

fn table_json(t: &Table, rounding: bool) -> Value {
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (h, c) in t.headers.iter().zip(row) {
                obj.insert(h.to_string(), value(c, rounding));
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

/// Writes the table to `out` (stdout when `None`). JSON documents carry the
/// run configuration and any extra summary fields next to the rows.
pub fn emit(
    table: &Table,
    style: Style,
    config: Value,
    summary: Option<Value>,
    out: Option<&Path>,
) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match style.format {
        Format::Csv => write_csv(table, style.paper_rounding, sink),
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("config".into(), config);
            if let Some(s) = summary {
                doc.insert("summary".into(), s);
            }
            doc.insert("rows".into(), table_json(table, style.paper_rounding));
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &Value::Object(doc))?;
            sink.write_all(b"\n")?;
            sink.flush()?;
            Ok(())
        }
    }
}
