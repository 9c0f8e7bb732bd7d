//! Report envelope and its JSON and text renderings.
//!
//! The text form is produced from the JSON value, so both carry the same numbers.

use serde_json::{json, Map, Value};

pub const TOOL: &str = "stochcoop";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, tolerance: f64, result: Value) -> Self {
        Report { command: command.to_string(), tolerance, seed: None, result }
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "tolerance": self.tolerance,
        });
        if let Some(seed) = self.seed {
            v["seed"] = json!(seed);
        }
        v["result"] = self.result.clone();
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("finite report");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render_object(&mut out, self.to_value().as_object().expect("object"), 0);
        out
    }
}

/// Number formatting shared with the JSON output.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            Some(format!("[{}]", items.iter().map(|i| scalar(i).unwrap()).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

/// Rows of flat objects sharing the first row's keys render as a table.
fn table_columns(items: &[Value]) -> Option<Vec<String>> {
    let first = items.first()?.as_object()?;
    let cols: Vec<String> = first.keys().cloned().collect();
    let flat = items.iter().all(|row| {
        row.as_object()
            .is_some_and(|o| o.len() == cols.len() && cols.iter().all(|c| o.get(c).and_then(scalar).is_some()))
    });
    flat.then_some(cols)
}

fn render_table(out: &mut String, items: &[Value], cols: &[String], indent: usize) {
    let cells: Vec<Vec<String>> =
        items.iter().map(|row| cols.iter().map(|c| scalar(&row[c.as_str()]).unwrap()).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap())
        .collect();
    let line = |out: &mut String, row: &[String]| {
        let parts: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(&" ".repeat(indent));
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(out, cols);
    for row in &cells {
        line(out, row);
    }
}

fn render_object(out: &mut String, obj: &Map<String, Value>, indent: usize) {
    let pad = " ".repeat(indent);
    for (k, v) in obj {
        if let Some(s) = scalar(v) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
            continue;
        }
        out.push_str(&format!("{pad}{k}:\n"));
        match v {
            Value::Object(o) => render_object(out, o, indent + 2),
            Value::Array(items) => match table_columns(items) {
                Some(cols) => render_table(out, items, &cols, indent + 2),
                None => {
                    for item in items {
                        match item {
                            Value::Object(o) => {
                                out.push_str(&format!("{pad}  -\n"));
                                render_object(out, o, indent + 4);
                            }
                            other => out.push_str(&format!("{pad}  - {}\n", scalar(other).unwrap_or_default())),
                        }
                    }
                }
            },
            _ => unreachable!(),
        }
    }
}
