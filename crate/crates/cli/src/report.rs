use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::Format;

/// A CSV table; numbers are written with 17 significant digits.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
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

fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) => number(*v),
                    Cell::Text(s) => quote(s),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Outcome of one subcommand: a JSON body, an optional CSV table and
/// whether any check failed.
pub struct Report {
    pub body: Map<String, Value>,
    pub table: Option<Table>,
    pub failed: bool,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut body = Map::new();
        body.insert("command".into(), Value::from(command));
        body.insert("seed".into(), Value::from(seed));
        Self {
            body,
            table: None,
            failed: false,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.body.insert(key.into(), v);
    }

    /// Copies the fields of a serializable struct into the body.
    pub fn merge(&mut self, value: impl Serialize) {
        match serde_json::to_value(value).expect("report values serialize") {
            Value::Object(m) => self.body.extend(m),
            other => {
                self.body.insert("result".into(), other);
            }
        }
    }

    fn scalar_table(&self) -> Table {
        let rows = self
            .body
            .iter()
            .filter_map(|(k, v)| {
                let cell = match v {
                    Value::Number(n) => Cell::Num(n.as_f64()?),
                    Value::Bool(b) => Cell::from(*b),
                    Value::String(s) => Cell::from(s.as_str()),
                    Value::Null => Cell::from(""),
                    _ => return None,
                };
                Some(vec![Cell::from(k.as_str()), cell])
            })
            .collect();
        Table {
            header: vec!["key", "value"],
            rows,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                // serde_json maps are ordered by key
                let mut s = serde_json::to_string_pretty(&Value::Object(self.body.clone())).expect("json");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => t.render(),
                None => self.scalar_table().render(),
            },
        }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> std::io::Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
        }
    }
}
