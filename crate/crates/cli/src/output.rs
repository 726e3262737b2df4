//! Report envelope and JSON/CSV writers.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One command's output. `config` must not depend on the worker count so
/// that output bytes are reproducible.
#[derive(Debug, Serialize)]
pub struct Report {
    pub config: Value,
    pub rows: Vec<Value>,
    pub summary: Value,
    pub schema: u32,
}

impl Report {
    pub fn new(config: Value, rows: Vec<Value>, summary: Value) -> Self {
        Self { config, rows, summary, schema: SCHEMA }
    }
}

pub fn to_rows<T: Serialize>(items: &[T]) -> Result<Vec<Value>> {
    items.iter().map(|x| serde_json::to_value(x).map_err(Into::into)).collect()
}

/// Nested objects become dotted columns; arrays are written as JSON text.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn write_csv<W: Write>(rows: &[Value], w: W) -> Result<()> {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut cells = Vec::new();
            flatten("", r, &mut cells);
            cells
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for row in &flat {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&header)?;
    for row in &flat {
        let lookup: Map<String, Value> = row.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        wtr.write_record(header.iter().map(|h| lookup.get(h).and_then(Value::as_str).unwrap_or("")))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink)?;
        }
        Format::Csv => write_csv(&report.rows, &mut sink)?,
    }
    sink.flush()?;
    Ok(())
}
