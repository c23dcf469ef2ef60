//! Tabular output as CSV or JSONL, preceded by the run configuration.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV starts with `# <config json>`; JSONL starts with `{"config": ...}`.
pub fn render(config: &Value, table: &Table, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(out, "# {config}").unwrap();
            writeln!(out, "{}", table.columns.join(",")).unwrap();
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                writeln!(out, "{}", cells.join(",")).unwrap();
            }
        }
        Format::Jsonl => {
            writeln!(out, "{}", serde_json::json!({ "config": config })).unwrap();
            for row in &table.rows {
                let obj: Map<String, Value> =
                    table.columns.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect();
                writeln!(out, "{}", Value::Object(obj)).unwrap();
            }
        }
    }
    out
}

/// Writes to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_and_jsonl() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![json!(1), json!("x,y")]);
        let cfg = json!({"seed": 3});
        assert_eq!(render(&cfg, &t, Format::Csv), "# {\"seed\":3}\na,b\n1,\"x,y\"\n");
        assert_eq!(render(&cfg, &t, Format::Jsonl), "{\"config\":{\"seed\":3}}\n{\"a\":1,\"b\":\"x,y\"}\n");
    }
}
