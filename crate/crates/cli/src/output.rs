use cone_weights::fredholm::{Endpoint, WeightWindow};
use cone_weights::Scalar;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::UsageError;

/// Rows for CSV output, one string per cell.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Everything a command prints. Text lines are built from the same values
/// that go into `json`.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub text: Vec<String>,
    pub table: Option<Table>,
    /// A check inside the command failed (exit status 1).
    pub failed: bool,
}

impl Report {
    pub fn new(json: Value, text: Vec<String>) -> Self {
        Report { json, text, table: None, failed: false }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Text => self.text.iter().map(|l| format!("{l}\n")).collect(),
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.json)?),
            Format::Csv => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| UsageError("csv output is only available for tabular commands".into()))?;
                let mut out = table.headers.join(",");
                out.push('\n');
                for row in &table.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
        })
    }
}

pub fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

pub fn scalar(x: Scalar) -> Value {
    value(&x)
}

pub fn endpoint(e: Endpoint) -> Value {
    match e {
        Endpoint::Finite(v) => scalar(v),
        other => json!({ "display": other.display(), "exact": false, "value": null }),
    }
}

pub fn window(name: &str, w: &WeightWindow) -> Value {
    json!({
        "name": name,
        "parametrization": w.parametrization.tag(),
        "operator": value(&w.operator),
        "lo": endpoint(w.lo),
        "hi": endpoint(w.hi),
        "display": w.display(),
        "index": w.index,
    })
}

pub fn window_line(name: &str, w: &WeightWindow) -> String {
    let index = w.index.map(|i| format!("  index {i}")).unwrap_or_default();
    format!("{name:<14} {:<6} {}{index}", w.parametrization.tag(), w.display())
}

pub fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}
